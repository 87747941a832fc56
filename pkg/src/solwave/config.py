"""Run configuration: schema, validation, and construction of core objects.

Configurations are single YAML documents validated strictly (unknown keys are
hard errors). The same pydantic models double as the request schemas of the
HTTP service.
"""

from __future__ import annotations

import math
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field as PField, ValidationError, model_validator

from .spectral import BesselSymbol, ExpressionSymbol, check_symbol_assumptions, make_grid

__all__ = [
    "ConfigError",
    "ProblemSpec",
    "GridSpec",
    "SolverSpec",
    "EvolveSpec",
    "ProbeSpec",
    "RunConfig",
    "parse_config",
    "build_symbols",
    "build_grid",
    "build_solve_config",
]


class ConfigError(ValueError):
    """Configuration rejected, with key/line context in the message."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemSpec(_Strict):
    s: float = 2.0
    r: float = 0.0
    dispersion_expression: str | None = None
    dispersion_low_exponent: float = 2.0
    nonlinear_expression: str | None = None

    @model_validator(mode="after")
    def _check_exponents(self):
        if not (self.s > 0 and self.r < self.s - 1):
            raise ValueError(
                f"exponent assumption violated: require s > 0 and r < s - 1, "
                f"got s={self.s}, r={self.r}"
            )
        return self


class GridSpec(_Strict):
    length: float = 200 * math.pi
    points: int = 4096


class SolverSpec(_Strict):
    mu: float = PField(default=0.4, gt=0)
    method: Literal["descent", "petviashvili", "hybrid"] = "hybrid"
    theta0: float | None = PField(default=None, gt=0, le=1)
    tol_residual: float = PField(default=1e-8, gt=0)
    tol_step: float = PField(default=1e-10, gt=0)
    max_iter: int = PField(default=20000, ge=1)
    continuation: list[float] = PField(default_factory=list)
    evenize: bool = False
    auto_enlarge: bool = True


class EvolveSpec(_Strict):
    dt: float | None = PField(default=None, gt=0)
    tmax: float | None = PField(default=None, gt=0)
    record_every: int = PField(default=100, ge=1)
    check_traveling: bool = True
    frame_tolerance: float = 1e-3
    mass_drift_tolerance: float = 1e-10
    energy_drift_tolerance: float = 1e-8


class ProbeSpec(_Strict):
    name: Literal[
        "nonlinear_bound",
        "gamma_upper",
        "infimum",
        "subadditivity",
        "commutator",
        "scaling",
        "smoothness",
    ] = "scaling"
    ensemble_size: int = PField(default=1000, ge=1)
    theta_grid: list[float] = PField(default_factory=list)
    mus: list[float] = PField(default_factory=list)
    splits: list[float] = PField(default_factory=list)
    radii: list[float] = PField(default_factory=lambda: [5.0, 10.0, 20.0, 40.0])


class RunConfig(_Strict):
    command: Literal["solve", "sweep", "evolve", "probe"] = "solve"
    problem: ProblemSpec = PField(default_factory=ProblemSpec)
    grid: GridSpec = PField(default_factory=GridSpec)
    solver: SolverSpec = PField(default_factory=SolverSpec)
    evolve: EvolveSpec = PField(default_factory=EvolveSpec)
    probe: ProbeSpec = PField(default_factory=ProbeSpec)
    output_dir: str = "out"
    seed: int = 0
    quiet: bool = False


def _format_validation_error(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        loc = ".".join(str(p) for p in item["loc"]) or "<root>"
        lines.append(f"  {loc}: {item['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML run configuration; unknown keys are errors."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"configuration is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_validation_error(exc)) from exc


def build_symbols(problem: ProblemSpec):
    """Construct (dispersive, nonlinear) symbols, checking general ones."""
    if problem.dispersion_expression is not None:
        disp = ExpressionSymbol(
            problem.dispersion_expression, problem.s, problem.dispersion_low_exponent
        )
        report = check_symbol_assumptions(disp, problem.s, problem.dispersion_low_exponent)
        if not report.passed:
            raise ConfigError(
                f"dispersion symbol {problem.dispersion_expression!r} fails the "
                f"symbol assumptions: {report}"
            )
    else:
        disp = BesselSymbol(problem.s)
    if problem.nonlinear_expression is not None:
        nl = ExpressionSymbol(problem.nonlinear_expression, problem.r)
    else:
        nl = BesselSymbol(problem.r)
    return disp, nl


def build_grid(spec: GridSpec):
    try:
        return make_grid(spec.length, spec.points)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def build_solve_config(cfg: RunConfig):
    from .solver import SolveConfig

    disp, nl = build_symbols(cfg.problem)
    grid = build_grid(cfg.grid)
    sv = cfg.solver
    return SolveConfig(
        mu=sv.mu,
        disp=disp,
        nl=nl,
        grid=grid,
        method=sv.method,
        theta0=sv.theta0,
        tol_residual=sv.tol_residual,
        tol_step=sv.tol_step,
        max_iter=sv.max_iter,
        continuation=tuple(sv.continuation),
        evenize=sv.evenize,
        auto_enlarge=sv.auto_enlarge,
    )
