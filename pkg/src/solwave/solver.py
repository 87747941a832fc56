"""Solitary-wave computation by constrained descent and fixed-point iteration.

A wave with prescribed mass is found by projected-gradient minimization of the
energy on the sphere {Q = mu}; the wave speed emerges as the Rayleigh quotient.
A Petviashvili iteration at fixed speed and a preconditioned fixed-point polish
are provided as independent routes to the same profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import functionals as fn
from .spectral import (
    BesselSymbol,
    Field,
    Grid,
    apply_multiplier,
    dealiased_product,
    extend_box,
    inner,
    l2_norm,
    make_grid,
    shift,
)

__all__ = [
    "SolveConfig",
    "WaveSolution",
    "symbol_order",
    "longwave_initial_guess",
    "project_mass",
    "constrained_descent",
    "petviashvili",
    "preconditioned_refine",
    "recentre",
    "continuation_sweep",
    "solve",
]

DEFAULT_BOX = 200 * math.pi
DEFAULT_POINTS = 4096

# Backtracking / step-size safeguards for the projected descent.
_BB_MIN, _BB_MAX = 1e-6, 1e3
_ARMIJO = 1e-4
_NONMONOTONE_WINDOW = 5


def symbol_order(sym) -> float:
    """Declared growth order of a symbol (Bessel order or declared exponent)."""
    if hasattr(sym, "order"):
        return float(sym.order)
    if hasattr(sym, "exponent"):
        return float(sym.exponent)
    raise TypeError(f"symbol {sym!r} does not declare a growth order")


@dataclass(frozen=True)
class SolveConfig:
    mu: float
    disp: object
    nl: object
    grid: Grid
    method: str = "descent"
    theta0: float | None = None
    tol_residual: float = 1e-8
    tol_step: float = 1e-10
    max_iter: int = 20000
    continuation: tuple = ()
    evenize: bool = False
    auto_enlarge: bool = True

    def __post_init__(self):
        s = symbol_order(self.disp)
        r = symbol_order(self.nl)
        if not (s > 0 and r < s - 1):
            raise ValueError(
                f"exponents must satisfy s > 0 and r < s - 1, got s={s}, r={r}"
            )
        if self.mu <= 0:
            raise ValueError(f"mass must be positive, got {self.mu}")
        if self.tol_residual <= 0 or self.tol_step <= 0 or self.max_iter < 1:
            raise ValueError("tolerances must be positive and max_iter >= 1")
        if self.method not in ("descent", "petviashvili", "hybrid"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.theta0 is not None and not (0 < self.theta0 <= 1):
            raise ValueError(f"ansatz scale must lie in (0, 1], got {self.theta0}")


@dataclass(frozen=True)
class WaveSolution:
    u: Field
    nu: float
    mu: float
    residual_l2: float
    iterations: int
    values: fn.FunctionalValues
    method: str
    converged: bool
    flags: tuple = ()

    @property
    def subcritical(self) -> bool:
        return self.nu < 1.0


def default_grid() -> Grid:
    return make_grid(DEFAULT_BOX, DEFAULT_POINTS)


def project_mass(u: Field, mu: float) -> Field:
    """Rescale u so that Q(u) = mu exactly."""
    q = fn.mass(u)
    if q <= 0:
        raise ValueError("cannot project the zero field onto a mass sphere")
    return u * math.sqrt(mu / q)


def longwave_initial_guess(cfg: SolveConfig) -> Field:
    """Mass-mu rescaled long-wave Gaussian ansatz sqrt(theta)*phi(theta*x)."""
    theta = cfg.theta0 if cfg.theta0 is not None else min(1.0, 0.5 * cfg.mu)
    if not (0 < theta <= 1):
        raise ValueError(f"ansatz scale must lie in (0, 1], got {theta}")
    x = cfg.grid.nodes
    profile = np.exp(-0.5 * (theta * x) ** 2) * math.sqrt(theta)
    return project_mass(Field(cfg.grid, profile), cfg.mu)


def _solution(u, nu, cfg, method, iterations, converged, flags=()):
    vals = fn.energy(u, cfg.disp, cfg.nl)
    res = fn.residual_l2(u, nu, cfg.disp, cfg.nl)
    if nu >= 1.0 and isinstance(cfg.disp, BesselSymbol):
        converged = False
        flags = flags + ("supercritical_speed",)
    return WaveSolution(
        u=u,
        nu=nu,
        mu=vals.mass,
        residual_l2=res,
        iterations=iterations,
        values=vals,
        method=method,
        converged=converged,
        flags=flags,
    )


def constrained_descent(cfg: SolveConfig, u0: Field) -> WaveSolution:
    """Projected gradient descent for the energy on the mass sphere.

    The sphere-tangential gradient equals the Euler-Lagrange residual at the
    Rayleigh speed, so the stopping residual comes for free each iteration.
    Steps use a Barzilai-Borwein initialization with nonmonotone backtracking.
    """
    if l2_norm(u0) == 0:
        raise ValueError("descent requires a nonzero starting field")
    u = project_mass(u0, cfg.mu)
    grad = fn.gradient_energy(u, cfg.disp, cfg.nl)
    nu = inner(grad, u) / inner(u, u)
    tangential = grad - nu * u
    current_energy = fn.energy(u, cfg.disp, cfg.nl).energy
    history = [current_energy]
    tau = 1.0

    iterations = 0
    converged = False
    flags = ()
    for iterations in range(1, cfg.max_iter + 1):
        res = l2_norm(tangential)
        if res <= cfg.tol_residual:
            converged = True
            iterations -= 1
            break

        reference = max(history[-_NONMONOTONE_WINDOW:])
        accepted = None
        step_tau = min(max(tau, _BB_MIN), _BB_MAX)
        for _ in range(50):
            trial = project_mass(u - step_tau * tangential, cfg.mu)
            trial_energy = fn.energy(trial, cfg.disp, cfg.nl).energy
            if trial_energy <= reference - _ARMIJO * step_tau * res**2:
                accepted = trial
                break
            step_tau *= 0.5
        if accepted is None:
            flags = ("line_search_stalled",)
            break

        step_norm = l2_norm(accepted - u)
        new_grad = fn.gradient_energy(accepted, cfg.disp, cfg.nl)
        new_nu = inner(new_grad, accepted) / inner(accepted, accepted)
        new_tangential = new_grad - new_nu * accepted

        # Barzilai-Borwein ratio from successive iterate/gradient differences.
        s_vec = accepted - u
        y_vec = new_tangential - tangential
        sy = inner(s_vec, y_vec)
        tau = inner(s_vec, s_vec) / sy if sy > 0 else step_tau * 2.0

        u, grad, nu, tangential = accepted, new_grad, new_nu, new_tangential
        history.append(trial_energy)
        if step_norm <= cfg.tol_step:
            converged = l2_norm(tangential) <= cfg.tol_residual
            if not converged:
                flags = flags + ("step_stalled",)
            break
    else:
        flags = flags + ("max_iter_exceeded",)

    return _solution(u, nu, cfg, "descent", iterations, converged, flags)


def petviashvili(nu: float, cfg: SolveConfig, u0: Field) -> WaveSolution:
    """Stabilized fixed-point iteration u <- M^{3/2} (Λˢ-ν)⁻¹(uΛʳu²).

    The exponent 3/2 matches the cubic homogeneity of the nonlinearity. The
    resulting mass is reported, not prescribed.
    """
    weights = cfg.disp(cfg.grid.wavenumbers)
    if nu >= weights.min():
        raise ValueError(
            f"speed {nu} is not below the dispersive symbol minimum {weights.min():.6g}"
        )
    inverse = 1.0 / (weights - nu)

    u = u0
    iterations = 0
    converged = False
    flags = ()
    for iterations in range(1, cfg.max_iter + 1):
        usq = dealiased_product(u, u)
        nonlin = dealiased_product(u, apply_multiplier(usq, cfg.nl))
        numerator = inner(apply_multiplier(u, cfg.disp), u) - nu * inner(u, u)
        denominator = inner(nonlin, u)
        if denominator <= 0 or numerator <= 0:
            flags = ("stabilizer_nonpositive",)
            break
        stabilizer = numerator / denominator
        u = Field.from_spectrum(cfg.grid, inverse * nonlin.spectrum) * stabilizer**1.5
        if abs(stabilizer - 1.0) <= cfg.tol_step:
            if fn.residual_l2(u, nu, cfg.disp, cfg.nl) <= cfg.tol_residual:
                converged = True
                break
    else:
        flags = flags + ("max_iter_exceeded",)

    return _solution(u, nu, cfg, "petviashvili", iterations, converged, flags)


def preconditioned_refine(
    sol: WaveSolution,
    cfg: SolveConfig,
    max_sweeps: int = 50,
    target_mu: float | None = None,
) -> WaveSolution:
    """Fixed-point polish u <- (Λˢ-ν+1)⁻¹(uΛʳu² + u), ν re-estimated per sweep.

    The inverse multiplier has operator norm <= 1 uniformly for ν < 1. With
    ``target_mu`` each sweep ends with a mass projection so the polished wave
    stays on the prescribed sphere. Returns the input (flagged) on no progress.
    """
    weights = cfg.disp(cfg.grid.wavenumbers)
    u = sol.u
    best_u, best_nu = u, sol.nu
    best_res = sol.residual_l2
    progressed = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        nu = fn.wave_speed_rayleigh(u, cfg.disp, cfg.nl)
        usq = dealiased_product(u, u)
        nonlin = dealiased_product(u, apply_multiplier(usq, cfg.nl))
        rhs = nonlin + u
        u = Field.from_spectrum(cfg.grid, rhs.spectrum / (weights - nu + 1.0))
        if target_mu is not None:
            u = project_mass(u, target_mu)
        nu = fn.wave_speed_rayleigh(u, cfg.disp, cfg.nl)
        res = fn.residual_l2(u, nu, cfg.disp, cfg.nl)
        if res < best_res:
            best_u, best_nu, best_res = u, nu, res
            progressed = True
        if res <= cfg.tol_residual:
            break

    if not progressed:
        return replace(sol, flags=sol.flags + ("refine_no_progress",))
    converged = best_res <= cfg.tol_residual or sol.converged
    return _solution(
        best_u, best_nu, cfg, sol.method, sol.iterations + sweeps, converged, sol.flags
    )


def recentre(u: Field, evenize: bool = False) -> Field:
    """Translate u so its peak magnitude sits at x = 0 (sub-grid accurate).

    Degenerate inputs with no distinguished peak are returned unchanged.
    """
    mags = np.abs(u.values)
    if l2_norm(u) == 0 or np.ptp(mags) <= 1e-13 * mags.max():
        return u
    j = int(np.argmax(mags))
    n = u.grid.npoints
    left, mid, right = mags[(j - 1) % n], mags[j], mags[(j + 1) % n]
    denom = left - 2 * mid + right
    offset = 0.5 * (left - right) / denom if denom != 0 else 0.0
    peak_x = u.grid.nodes[j] + offset * u.grid.spacing
    out = shift(u, -peak_x)
    if evenize:
        out = Field(out.grid, 0.5 * (out.values + out.values[::-1].take(range(-1, out.grid.npoints - 1))))
    return out


def _tail_fraction(u: Field, mu: float) -> float:
    from .probes import tail_mass

    return tail_mass(u) / mu


def solve(cfg: SolveConfig, u0: Field | None = None) -> WaveSolution:
    """Compute the wave of mass cfg.mu, with box enlargement if tails are cut.

    Methods: "descent" is pure projected descent; "hybrid" follows a looser
    descent with the preconditioned polish; "petviashvili" estimates the speed
    by a coarse descent first and reprojects the mass afterwards.
    """
    cfg_work = cfg
    guess = u0 if u0 is not None else longwave_initial_guess(cfg_work)
    sol = _solve_on_grid(cfg_work, guess)

    if cfg.auto_enlarge:
        for _ in range(3):
            if not sol.converged or _tail_fraction(sol.u, cfg.mu) <= 1e-10:
                break
            bigger = extend_box(recentre(sol.u), 2)
            cfg_work = replace(cfg_work, grid=bigger.grid)
            sol = _solve_on_grid(cfg_work, bigger)
        else:
            sol = replace(sol, flags=sol.flags + ("box_enlargement_capped",))

    return replace(sol, u=recentre(sol.u, evenize=cfg.evenize))


def _solve_on_grid(cfg: SolveConfig, guess: Field) -> WaveSolution:
    if cfg.method == "descent":
        return constrained_descent(cfg, guess)
    loose = replace(cfg, method="descent", tol_residual=1e-3, max_iter=min(cfg.max_iter, 3000))
    coarse = constrained_descent(loose, guess)
    if cfg.method == "petviashvili":
        return petviashvili(min(coarse.nu, 1.0 - 1e-6), cfg, coarse.u)
    return _mass_targeted_petviashvili(cfg, coarse)


def _mass_targeted_petviashvili(cfg: SolveConfig, coarse: WaveSolution) -> WaveSolution:
    """Outer secant iteration on the speed so the fixed mass comes out right.

    The branch satisfies 1-ν ≈ const·μ² for small masses, which provides the
    first speed update; later updates use a secant on log(1-ν) vs log(μ).
    """
    floor = float(cfg.disp(cfg.grid.wavenumbers).min())
    nu = min(coarse.nu, floor - 1e-8 * max(abs(floor), 1.0))
    u = coarse.u
    sol = coarse
    previous = None  # (log(1-ν), log μ) of the last outer iterate
    for _ in range(20):
        sol = petviashvili(nu, cfg, u)
        if not sol.converged and "stabilizer_nonpositive" in sol.flags:
            break
        u = sol.u
        mismatch = sol.mu / cfg.mu
        if abs(mismatch - 1.0) <= 1e-12:
            break
        gap = floor - nu
        point = (math.log(gap), math.log(sol.mu))
        if previous is not None and abs(point[1] - previous[1]) > 1e-14:
            slope = (point[0] - previous[0]) / (point[1] - previous[1])
            slope = min(max(slope, 0.5), 8.0)
        else:
            slope = 2.0
        previous = point
        factor = min(max(mismatch ** (-slope), 0.25), 4.0)
        nu = floor - gap * factor

    u = project_mass(sol.u, cfg.mu)
    nu = fn.wave_speed_rayleigh(u, cfg.disp, cfg.nl)
    out = _solution(u, nu, cfg, "hybrid", sol.iterations, sol.converged, sol.flags)
    if out.residual_l2 > cfg.tol_residual:
        out = preconditioned_refine(out, cfg, max_sweeps=200, target_mu=cfg.mu)
        out = replace(out, method="hybrid", converged=out.residual_l2 <= cfg.tol_residual)
    return out


def continuation_sweep(cfg: SolveConfig):
    """Solve an ascending list of masses with warm starts; one record per mass.

    Returns (records, solutions); failures are flagged rows, the sweep goes on.
    """
    from .probes import make_sweep_record

    mus = tuple(cfg.continuation) or (cfg.mu,)
    if any(m <= 0 for m in mus) or list(mus) != sorted(mus):
        raise ValueError("continuation masses must be positive and ascending")

    records = []
    solutions = []
    warm: Field | None = None
    for mu in mus:
        step_cfg = replace(cfg, mu=mu, continuation=())
        if warm is not None and warm.grid == step_cfg.grid:
            start = project_mass(warm, mu)
        elif warm is not None:
            # Grid changed by auto-enlargement: keep using the enlarged box.
            step_cfg = replace(step_cfg, grid=warm.grid)
            start = project_mass(warm, mu)
        else:
            start = longwave_initial_guess(step_cfg)
        sol = solve(step_cfg, start)
        records.append(make_sweep_record(sol, step_cfg))
        solutions.append(sol)
        if sol.converged:
            warm = sol.u
    return records, solutions
