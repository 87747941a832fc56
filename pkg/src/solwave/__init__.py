"""Solitary waves for dispersive equations with a cubic nonlocal nonlinearity.

Core layers: spectral discretization (``spectral``), conserved functionals
(``functionals``), wave solvers (``solver``), time integration (``evolution``),
diagnostic probes (``probes``), and the configuration/service/CLI wrappers.
"""

from .config import RunConfig, parse_config
from .functionals import energy, mass
from .solver import SolveConfig, WaveSolution, solve
from .spectral import BesselSymbol, ExpressionSymbol, Field, Grid, make_grid

__all__ = [
    "RunConfig",
    "parse_config",
    "energy",
    "mass",
    "SolveConfig",
    "WaveSolution",
    "solve",
    "BesselSymbol",
    "ExpressionSymbol",
    "Field",
    "Grid",
    "make_grid",
]

__version__ = "0.1.0"
