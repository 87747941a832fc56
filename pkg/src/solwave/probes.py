"""Numerical probes of the variational inequalities, bounds and scaling laws.

Each probe is a read-only diagnostic over fields or solver output: upper
bounds from the long-wave ansatz, strict subadditivity of the constrained
infimum, decay of the nonlocal commutator, small-mass scaling exponents, and
the spectral-decay proxy for smoothness of converged waves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import functionals as fn
from .spectral import (
    BesselSymbol,
    Field,
    Grid,
    apply_multiplier,
    dealiased_product,
    inner,
    make_grid,
)

__all__ = [
    "SweepRecord",
    "GammaEstimate",
    "FitResult",
    "NonlinearBoundStats",
    "SmoothnessReport",
    "make_sweep_record",
    "tail_mass",
    "probe_nonlinear_bound",
    "probe_gamma_upper",
    "probe_infimum_improved",
    "probe_subadditivity",
    "probe_commutator_decay",
    "probe_scaling_laws",
    "probe_smoothness",
    "loglog_fit",
]

TAIL_ADMISSION = 1e-8  # records beyond this tail fraction are excluded from fits


@dataclass(frozen=True)
class SweepRecord:
    mu: float
    nu: float
    h_half_s_norm: float
    sup_norm: float
    nonlinearity: float
    energy: float
    residual_l2: float
    tail_mass: float
    converged: bool

    @property
    def admitted(self) -> bool:
        return self.converged and self.tail_mass <= TAIL_ADMISSION * self.mu


@dataclass(frozen=True)
class GammaEstimate:
    mu: float
    gamma_upper: float
    method: str
    below_mu: bool


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    window: tuple


@dataclass(frozen=True)
class NonlinearBoundStats:
    gamma: float
    max_ratio: float
    median_ratio: float
    count: int


@dataclass(frozen=True)
class SmoothnessReport:
    decay_rate: float
    r_squared: float
    top_band_ratio: float
    fitted_modes: int
    exponential: bool


def tail_mass(u: Field) -> float:
    """Half-integral of u² over the outer 10% of the box (5% per side)."""
    cut = 0.45 * u.grid.length
    mask = np.abs(u.grid.nodes) >= cut
    return 0.5 * float(np.sum(u.values[mask] ** 2) * u.grid.spacing)


def make_sweep_record(sol, cfg) -> SweepRecord:
    from .solver import symbol_order

    s = symbol_order(cfg.disp)
    from .spectral import sobolev_norm

    return SweepRecord(
        mu=sol.mu,
        nu=sol.nu,
        h_half_s_norm=sobolev_norm(sol.u, s / 2),
        sup_norm=float(np.max(np.abs(sol.u.values))),
        nonlinearity=sol.values.nonlinearity,
        energy=sol.values.energy,
        residual_l2=sol.residual_l2,
        tail_mass=tail_mass(sol.u),
        converged=sol.converged,
    )


def _interpolation_gamma(s: float, r: float) -> float:
    # Exponent from the constructive interpolation argument behind the bound.
    if s > 1:
        tau = 0.5 * (1.0 + (s - r))
        return (r + tau) / s
    r_tilde = r if r > -1 else 0.5 * (-1.0 + (s - 1.0))
    return (r_tilde + 1.0) / s


_ENVELOPES = ("flat", "algebraic", "gaussian")


def _random_band_limited(rng, grid: Grid, envelope: str) -> Field:
    xi = grid.wavenumbers
    cutoff = rng.uniform(0.25, 1.0) * np.max(np.abs(xi))
    if envelope == "flat":
        shape = (np.abs(xi) <= cutoff).astype(float)
    elif envelope == "algebraic":
        a = rng.uniform(0.5, 2.5)
        shape = (1.0 + xi**2) ** (-a / 2) * (np.abs(xi) <= cutoff)
    else:
        width = rng.uniform(0.1, 0.5) * cutoff + 1e-3
        shape = np.exp(-((xi / width) ** 2))
    phases = np.exp(2j * np.pi * rng.uniform(size=xi.size))
    amps = rng.normal(size=xi.size)
    spec = shape * amps * phases
    spec = 0.5 * (spec + np.conj(spec[np.r_[0, grid.npoints - 1 : 0 : -1]]))
    spec[grid.npoints // 2] = 0.0
    return Field.from_spectrum(grid, spec)


def probe_nonlinear_bound(
    s: float,
    r: float,
    ensemble_size: int = 1000,
    seed: int = 0,
    grid: Grid | None = None,
) -> NonlinearBoundStats:
    """Empirical boundedness of ‖u²‖_{H^{r/2}} / (‖u‖_{L²}^{2-γ}‖u‖_{H^{s/2}}^γ)."""
    if not (s > 0 and r < s - 1):
        raise ValueError(f"require s > 0 and r < s - 1, got s={s}, r={r}")
    if grid is None:
        grid = make_grid(40 * math.pi, 512)
    gamma = _interpolation_gamma(s, r)
    rng = np.random.default_rng(seed)
    from .spectral import sobolev_norm

    ratios = []
    for k in range(ensemble_size):
        u = _random_band_limited(rng, grid, _ENVELOPES[k % len(_ENVELOPES)])
        l2 = sobolev_norm(u, 0.0)
        if l2 == 0:
            continue
        hs = sobolev_norm(u, s / 2)
        usq = dealiased_product(u, u)
        ratios.append(sobolev_norm(usq, r / 2) / (l2 ** (2 - gamma) * hs**gamma))
    ratios = np.asarray(ratios)
    return NonlinearBoundStats(
        gamma=gamma,
        max_ratio=float(ratios.max()),
        median_ratio=float(np.median(ratios)),
        count=int(ratios.size),
    )


def ansatz_energy(mu: float, theta: float, disp, nl, grid: Grid) -> float:
    """Energy of the mass-projected long-wave Gaussian ansatz at scale theta."""
    from .solver import SolveConfig, longwave_initial_guess

    cfg = SolveConfig(mu=mu, disp=disp, nl=nl, grid=grid, theta0=theta)
    phi = longwave_initial_guess(cfg)
    return fn.energy(phi, disp, nl).energy


def probe_gamma_upper(mu: float, theta_grid, disp, nl, grid: Grid) -> GammaEstimate:
    """Upper bound for the constrained infimum from the long-wave ansatz scan."""
    thetas = [t for t in theta_grid if 0 < t < 1]
    if not thetas:
        raise ValueError("theta grid must contain values in (0, 1)")
    best = min(ansatz_energy(mu, t, disp, nl, grid) for t in thetas)
    return GammaEstimate(mu=mu, gamma_upper=best, method="ansatz_scan", below_mu=best < mu)


def probe_infimum_improved(mus, disp, nl, grid: Grid, coeff_grid=None):
    """Small-mass sweep of the ansatz bound with theta proportional to mu.

    Returns (estimates, kappa, positive) where kappa is the fitted lower bound
    of (mu - gamma_upper)/mu³ across the window.
    """
    if coeff_grid is None:
        coeff_grid = np.linspace(0.1, 2.0, 20)
    estimates = []
    deficits = []
    for mu in mus:
        thetas = [c * mu for c in coeff_grid if 0 < c * mu < 1]
        est = probe_gamma_upper(mu, thetas, disp, nl, grid)
        estimates.append(est)
        deficits.append((mu - est.gamma_upper) / mu**3)
    kappa = float(min(deficits))
    return estimates, kappa, kappa > 0


def probe_subadditivity(mu: float, splits, cfg_template):
    """Solver-based check of strict subadditivity of the constrained infimum.

    Returns a list of dicts with the gap Γ̂(mu) - Γ̂(λ) - Γ̂(mu-λ) per split
    (strictly negative when subadditivity holds); failed solves are marked
    inconclusive.
    """
    from .solver import solve

    if any(not (0 < lam < mu) for lam in splits):
        raise ValueError("splits must lie strictly inside (0, mu)")

    cache: dict[float, object] = {}

    def estimate(mass):
        key = round(mass, 12)
        if key not in cache:
            cache[key] = solve(replace(cfg_template, mu=mass, continuation=()))
        return cache[key]

    report = []
    for lam in splits:
        parts = [estimate(mu), estimate(lam), estimate(mu - lam)]
        if not all(p.converged for p in parts):
            report.append({"lam": lam, "gap": None, "conclusive": False})
            continue
        gap = parts[0].values.energy - parts[1].values.energy - parts[2].values.energy
        report.append({"lam": lam, "gap": gap, "conclusive": True})
    return report


def probe_commutator_decay(u: Field, v: Field, r: float, radii) -> list:
    """Table of (R, I(R)) with I(R) = |∫v²(ρ_RΛʳu² - Λʳ(ρ_Ru²))dx|.

    ρ is a fixed unit-height Gaussian bump; R must satisfy R <= L/8.
    """
    grid = u.grid
    if any(R <= 0 or R > grid.length / 8 for R in radii):
        raise ValueError("radii must be positive and at most L/8")
    nl = BesselSymbol(r)
    usq = dealiased_product(u, u)
    vsq = dealiased_product(v, v)
    lam_usq = apply_multiplier(usq, nl)
    table = []
    for radius in radii:
        rho = Field(grid, np.exp(-0.5 * (grid.nodes / radius) ** 2))
        direct = dealiased_product(rho, lam_usq)
        swapped = apply_multiplier(dealiased_product(rho, usq), nl)
        table.append((float(radius), abs(inner(vsq, direct - swapped))))
    return table


def loglog_fit(xs, ys) -> FitResult:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit requires positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r_squared),
        window=(float(xs.min()), float(xs.max())),
    )


def probe_scaling_laws(records) -> dict:
    """Log-log scaling fits over admitted sweep records.

    Expected slopes: 1/2 for ‖u‖_{H^{s/2}} and ‖u‖_∞, 2 for 1-ν, 3 for the
    nonlocal quartic part.
    """
    admitted = [rec for rec in records if rec.admitted]
    if len(admitted) < 5:
        raise ValueError(f"need at least 5 admitted records, got {len(admitted)}")
    mus = [rec.mu for rec in admitted]
    if max(mus) / min(mus) < 10 - 1e-9:
        raise ValueError("admitted records must span at least a decade in mu")
    return {
        "h_half_s_norm": loglog_fit(mus, [rec.h_half_s_norm for rec in admitted]),
        "one_minus_nu": loglog_fit(mus, [1.0 - rec.nu for rec in admitted]),
        "nonlinearity": loglog_fit(mus, [rec.nonlinearity for rec in admitted]),
        "sup_norm": loglog_fit(mus, [rec.sup_norm for rec in admitted]),
    }


def probe_smoothness(u: Field, floor: float = 1e-13) -> SmoothnessReport:
    """Spectral-decay proxy for smoothness of a converged wave.

    Fits log|û| against ξ over the upper half of the resolved band (modes above
    the rounding floor) and reports the largest top-quarter-band coefficient
    relative to the peak.
    """
    xi = u.grid.wavenumbers
    amps = np.abs(u.spectrum)
    peak = float(amps.max())
    pos = xi > 0
    xi_pos, amp_pos = xi[pos], amps[pos]

    resolved = amp_pos >= floor * peak
    xi_res = xi_pos[resolved]
    top_band_ratio = float(amps[np.abs(xi) >= 0.75 * np.abs(xi).max()].max() / peak)
    if xi_res.size < 8:
        return SmoothnessReport(0.0, 0.0, top_band_ratio, int(xi_res.size), False)

    upper = resolved & (xi_pos >= 0.5 * xi_res.max())
    xs, ys = xi_pos[upper], amp_pos[upper]
    fit = _linear_fit(xs, np.log(ys))
    return SmoothnessReport(
        decay_rate=-fit[0],
        r_squared=fit[2],
        top_band_ratio=top_band_ratio,
        fitted_modes=int(xs.size),
        exponential=fit[2] >= 0.99 and fit[0] < 0,
    )


def _linear_fit(xs, ys):
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), float(r_squared)
