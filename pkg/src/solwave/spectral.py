"""Periodic grid, spectral transforms, Fourier multipliers and dealiased products.

All other modules build on the conventions fixed here:

* the physical inner product is the box quadrature ``sum(u*v) * L/N``,
* the stored spectrum holds discrete Fourier coefficients ``c = fft(values)/N``,
  so that Parseval reads ``sum(u*v)*L/N == L * sum(c_u * conj(c_v)).real``,
* the unpaired Nyquist mode (k = -N/2) is zeroed by odd multipliers
  (the derivative) to keep real fields real.
"""

from __future__ import annotations

import ast
import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "BesselSymbol",
    "ExpressionSymbol",
    "SymbolReport",
    "make_grid",
    "apply_multiplier",
    "derivative",
    "sobolev_norm",
    "dealiased_product",
    "check_symbol_assumptions",
    "inner",
    "l2_norm",
    "shift",
    "extend_box",
    "coarsen",
    "auto_coarsen",
    "field_to_csv",
    "spectrum_to_csv",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the box [-L/2, L/2)."""

    length: float
    npoints: int
    nodes: np.ndarray = field(repr=False)
    wavenumbers: np.ndarray = field(repr=False)

    @property
    def spacing(self) -> float:
        return self.length / self.npoints

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.length == other.length and self.npoints == other.npoints

    def __hash__(self):
        return hash((self.length, self.npoints))


def make_grid(length: float, npoints: int) -> Grid:
    """Build a periodic grid with nodes x_j = -L/2 + j*L/N and ξ_k = 2πk/L."""
    if length <= 0:
        raise ValueError(f"box length must be positive, got {length}")
    if npoints % 2 != 0 or npoints < 8:
        raise ValueError(f"number of points must be even and >= 8, got {npoints}")
    dx = length / npoints
    nodes = -length / 2 + dx * np.arange(npoints)
    xi = 2 * np.pi * np.fft.fftfreq(npoints, d=dx)
    nodes.setflags(write=False)
    xi.setflags(write=False)
    return Grid(length=float(length), npoints=int(npoints), nodes=nodes, wavenumbers=xi)


class Field:
    """Real-valued function sampled on a Grid, with a lazily computed spectrum.

    The spectrum is stored in numpy fft order; ``spectrum[k] = fft(values)[k]/N``.
    Fields are treated as immutable values: operations return new instances.
    """

    __slots__ = ("grid", "_values", "_spectrum")

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.npoints,):
            raise ValueError(f"expected {grid.npoints} samples, got shape {values.shape}")
        self.grid = grid
        self._values = values.copy()
        self._values.setflags(write=False)
        self._spectrum = None

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "Field":
        spectrum = np.asarray(spectrum, dtype=complex)
        values = np.fft.ifft(spectrum * grid.npoints).real
        out = cls(grid, values)
        out._spectrum = spectrum.copy()
        out._spectrum.setflags(write=False)
        return out

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            spec = np.fft.fft(self._values) / self.grid.npoints
            spec.setflags(write=False)
            self._spectrum = spec
        return self._spectrum

    def __add__(self, other: "Field") -> "Field":
        _require_same_grid(self, other)
        return Field(self.grid, self._values + other._values)

    def __sub__(self, other: "Field") -> "Field":
        _require_same_grid(self, other)
        return Field(self.grid, self._values - other._values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self._values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self._values)


def _require_same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")


def _require_finite(u: Field) -> None:
    if not np.all(np.isfinite(u.values)):
        raise ValueError("field contains non-finite samples")


class BesselSymbol:
    """Bessel multiplier symbol ξ ↦ (1+ξ²)^{α/2}."""

    def __init__(self, order: float):
        self.order = float(order)

    def __call__(self, xi):
        return (1.0 + np.asarray(xi, dtype=float) ** 2) ** (self.order / 2)

    def __repr__(self):
        return f"BesselSymbol(order={self.order})"


_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def _parse_symbol_expression(text: str):
    """Compile a symbol expression over the small grammar.

    Allowed: numbers, the variable ``xi``, the Japanese bracket ``jxi``
    (= sqrt(1+xi^2)), ``abs``, and +, -, *, /, ** combinations thereof.
    """
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if isinstance(node, ast.Expression):
            continue
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            continue
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            continue
        if isinstance(node, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Load)):
            continue
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            continue
        if isinstance(node, ast.Name) and node.id in ("xi", "jxi"):
            continue
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "abs":
            continue
        raise ValueError(f"disallowed construct in symbol expression: {ast.dump(node)}")
    code = compile(tree, "<symbol>", "eval")

    def evaluate(xi):
        xi = np.asarray(xi, dtype=float)
        env = {"xi": xi, "jxi": np.sqrt(1.0 + xi**2), "abs": np.abs}
        return np.asarray(eval(code, {"__builtins__": {}}, env), dtype=float)

    return evaluate


class ExpressionSymbol:
    """Symbol given by a closed-form expression with declared growth exponents.

    ``exponent`` is the declared high-frequency growth order (s for dispersive
    symbols, r for nonlinear ones); ``exponent_low`` the low-frequency one (s').
    """

    def __init__(self, expression: str, exponent: float, exponent_low: float | None = None):
        self.expression = expression
        self.exponent = float(exponent)
        self.exponent_low = float(exponent_low) if exponent_low is not None else None
        self._fn = _parse_symbol_expression(expression)
        probe = np.linspace(0.0, 37.3, 41)
        if not np.allclose(self._fn(probe), self._fn(-probe), rtol=1e-12, atol=1e-14):
            raise ValueError(f"symbol {expression!r} is not even")

    def __call__(self, xi):
        return self._fn(xi)

    def __repr__(self):
        return f"ExpressionSymbol({self.expression!r}, exponent={self.exponent})"


@dataclass
class SymbolReport:
    even: bool
    positive: bool
    high_ratio_min: float
    high_ratio_max: float
    low_ratio_min: float
    low_ratio_max: float
    bound_constant: float
    passed: bool


def check_symbol_assumptions(sym, s: float, s_prime: float, bound_constant: float = 100.0) -> SymbolReport:
    """Sample-based check of the dispersive-symbol assumptions.

    Checks evenness, positivity, and that (m(ξ)-m(0))/|ξ|^s on |ξ|>=1 and
    (m(ξ)-m(0))/|ξ|^{s'} on 0<|ξ|<1 stay within [1/C, C].
    """
    xi_high = np.concatenate([np.linspace(1.0, 10.0, 200), np.geomspace(10.0, 1e4, 200)])
    xi_low = np.geomspace(1e-4, 1.0, 200, endpoint=False)
    xi_all = np.concatenate([xi_low, xi_high])

    even = bool(np.allclose(sym(xi_all), sym(-xi_all), rtol=1e-10, atol=1e-13))
    positive = bool(np.all(sym(xi_all) > 0) and sym(np.array([0.0]))[0] > 0)

    m0 = float(sym(np.array([0.0]))[0])
    high = (sym(xi_high) - m0) / xi_high**s
    low = (sym(xi_low) - m0) / xi_low**s_prime
    c = float(bound_constant)
    in_bounds = (
        np.all(high >= 1 / c) and np.all(high <= c)
        and np.all(low >= 1 / c) and np.all(low <= c)
    )
    return SymbolReport(
        even=even,
        positive=positive,
        high_ratio_min=float(high.min()),
        high_ratio_max=float(high.max()),
        low_ratio_min=float(low.min()),
        low_ratio_max=float(low.max()),
        bound_constant=c,
        passed=bool(even and positive and in_bounds),
    )


def apply_multiplier(u: Field, sym) -> Field:
    """Apply the Fourier multiplier with the given (even, real) symbol."""
    _require_finite(u)
    weights = sym(u.grid.wavenumbers)
    return Field.from_spectrum(u.grid, weights * u.spectrum)


def derivative(u: Field) -> Field:
    """Spectral d/dx; the unpaired Nyquist mode is zeroed."""
    _require_finite(u)
    xi = u.grid.wavenumbers.copy()
    xi[u.grid.npoints // 2] = 0.0
    return Field.from_spectrum(u.grid, 1j * xi * u.spectrum)


def inner(u: Field, v: Field) -> float:
    """Box L² inner product by the trapezoid (here: uniform) quadrature."""
    _require_same_grid(u, v)
    return float(np.dot(u.values, v.values) * u.grid.spacing)


def l2_norm(u: Field) -> float:
    return math.sqrt(max(inner(u, u), 0.0))


def sobolev_norm(u: Field, t: float) -> float:
    """Discrete H^t norm, sqrt(Σ_k (1+ξ_k²)^t |c_k|² L)."""
    _require_finite(u)
    weights = (1.0 + u.grid.wavenumbers**2) ** t
    return math.sqrt(float(np.sum(weights * np.abs(u.spectrum) ** 2) * u.grid.length))


def _pad_spectrum(spec: np.ndarray, m: int) -> np.ndarray:
    """Zero-pad an fft-ordered coefficient array from length n to length m."""
    n = spec.size
    shifted = np.fft.fftshift(spec)
    pad = (m - n) // 2
    return np.fft.ifftshift(np.concatenate([np.zeros(pad, complex), shifted, np.zeros(m - n - pad, complex)]))


def _truncate_spectrum(spec: np.ndarray, n: int) -> np.ndarray:
    m = spec.size
    shifted = np.fft.fftshift(spec)
    cut = (m - n) // 2
    return np.fft.ifftshift(shifted[cut:cut + n])


def dealiased_product(u: Field, v: Field) -> Field:
    """Pointwise product via zero-padding to 2N; alias-free for quadratic terms."""
    _require_same_grid(u, v)
    n = u.grid.npoints
    m = 2 * n
    a = np.fft.ifft(_pad_spectrum(u.spectrum, m) * m).real
    b = np.fft.ifft(_pad_spectrum(v.spectrum, m) * m).real
    c = np.fft.fft(a * b) / m
    return Field.from_spectrum(u.grid, _truncate_spectrum(c, n))


def shift(u: Field, distance: float) -> Field:
    """Exact spectral translation, u(x) ↦ u(x - distance)."""
    xi = u.grid.wavenumbers
    return Field.from_spectrum(u.grid, u.spectrum * np.exp(-1j * xi * distance))


def extend_box(u: Field, factor: int = 2, keep_resolution: bool = False) -> Field:
    """Embed a localized field in a box enlarged by an integer factor.

    The field is extended by zeros at both ends. With ``keep_resolution`` the
    node spacing is preserved (N grows with L); otherwise N is kept and the
    samples are spectrally decimated, which is exact while the discarded band
    carries no energy.
    """
    n = u.grid.npoints
    big = make_grid(u.grid.length * factor, n * factor)
    pad = (big.npoints - n) // 2
    values = np.concatenate([np.zeros(pad), u.values, np.zeros(big.npoints - n - pad)])
    out = Field(big, values)
    if keep_resolution:
        return out
    return coarsen(out, factor)


def coarsen(u: Field, factor: int) -> Field:
    """Spectral band truncation to N/factor points on the same box."""
    n = u.grid.npoints
    if n % factor != 0:
        raise ValueError("factor must divide N")
    small = make_grid(u.grid.length, n // factor)
    return Field.from_spectrum(small, _truncate_spectrum(u.spectrum, small.npoints))


def auto_coarsen(u: Field, floor: float = 1e-13, min_points: int = 512) -> Field:
    """Repeatedly halve the band while the discarded half carries no energy.

    Useful before long time integrations of well-resolved localized fields:
    the truncation is exact to the stated floor and shrinks both the FFT cost
    and the stiffness of the explicit stages.
    """
    out = u
    while out.grid.npoints > min_points:
        amps = np.abs(out.spectrum)
        xi = np.abs(out.grid.wavenumbers)
        if amps[xi >= 0.5 * xi.max()].max() > floor * amps.max():
            break
        out = coarsen(out, 2)
    return out


def _series_coefficients(u: Field) -> np.ndarray:
    # Coefficients of the centered Fourier series, a_k = c_k * exp(i ξ_k L/2).
    xi = u.grid.wavenumbers
    return u.spectrum * np.exp(1j * xi * u.grid.length / 2)


def field_to_csv(u: Field, path) -> None:
    """Dump samples as CSV with header x,u at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "u"])
        for x, val in zip(u.grid.nodes, u.values):
            writer.writerow([f"{x:.17g}", f"{val:.17g}"])


def spectrum_to_csv(u: Field, path) -> None:
    """Dump centered Fourier-series coefficients as CSV with header k,xi,re,im."""
    n = u.grid.npoints
    coeffs = _series_coefficients(u)
    ks = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    order = np.argsort(ks)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "xi", "re", "im"])
        for idx in order:
            writer.writerow([
                ks[idx],
                f"{u.grid.wavenumbers[idx]:.17g}",
                f"{coeffs[idx].real:.17g}",
                f"{coeffs[idx].imag:.17g}",
            ])
