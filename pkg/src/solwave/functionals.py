"""Variational functionals for the solitary-wave problem.

The energy is E(u) = L(u) - N(u) with

    Q(u) = 1/2 ∫ u² dx          (mass, the constraint)
    L(u) = 1/2 ∫ u Λˢu dx       (dispersive part)
    N(u) = 1/4 ∫ u² Λʳu² dx     (nonlocal quartic part)

and the critical-point equation is -νu + Λˢu - uΛʳu² = 0 with the wave
speed ν appearing as the Lagrange multiplier of the mass constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

from .spectral import Field, apply_multiplier, dealiased_product, inner, l2_norm

__all__ = [
    "FunctionalValues",
    "mass",
    "dispersion",
    "nonlocal_quartic",
    "energy",
    "gradient_energy",
    "el_residual",
    "wave_speed_rayleigh",
]


@dataclass(frozen=True)
class FunctionalValues:
    mass: float
    dispersion: float
    nonlinearity: float
    energy: float


def mass(u: Field) -> float:
    """Q(u) = 1/2 ∫ u² dx on the box."""
    return 0.5 * inner(u, u)


def dispersion(u: Field, disp) -> float:
    """L(u) = 1/2 <u, Λˢu> via spectral weights."""
    return 0.5 * inner(u, apply_multiplier(u, disp))


def nonlocal_quartic(u: Field, nl) -> float:
    """N(u) = 1/4 <u², Λʳu²> with u² formed alias-free."""
    usq = dealiased_product(u, u)
    return 0.25 * inner(usq, apply_multiplier(usq, nl))


def energy(u: Field, disp, nl) -> FunctionalValues:
    q = mass(u)
    lval = dispersion(u, disp)
    nval = nonlocal_quartic(u, nl)
    return FunctionalValues(mass=q, dispersion=lval, nonlinearity=nval, energy=lval - nval)


def gradient_energy(u: Field, disp, nl) -> Field:
    """Fréchet derivative of E: Λˢu - uΛʳu² (dealiased)."""
    usq = dealiased_product(u, u)
    nonlin = dealiased_product(u, apply_multiplier(usq, nl))
    return apply_multiplier(u, disp) - nonlin


def el_residual(u: Field, nu: float, disp, nl) -> Field:
    """Euler-Lagrange residual -νu + Λˢu - uΛʳu²."""
    return gradient_energy(u, disp, nl) - nu * u


def wave_speed_rayleigh(u: Field, disp, nl) -> float:
    """Rayleigh wave speed ν = (2L - 4N)/(2Q), making the residual ⊥ u."""
    q = mass(u)
    if q <= 0:
        raise ValueError("wave speed undefined for the zero field")
    return (2.0 * dispersion(u, disp) - 4.0 * nonlocal_quartic(u, nl)) / (2.0 * q)


def residual_l2(u: Field, nu: float, disp, nl) -> float:
    """L² norm of the Euler-Lagrange residual."""
    return l2_norm(el_residual(u, nu, disp, nl))
