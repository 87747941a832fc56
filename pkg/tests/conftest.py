"""Shared fixtures and helpers for the test suite."""

import math

import numpy as np
import pytest

from solwave.spectral import BesselSymbol, Field, make_grid


@pytest.fixture
def small_grid():
    return make_grid(2 * math.pi, 64)


@pytest.fixture
def wave_grid():
    return make_grid(200 * math.pi, 4096)


@pytest.fixture
def bessel_pair():
    return BesselSymbol(2.0), BesselSymbol(0.0)


def sech_wave(grid, nu):
    """Closed-form solitary wave of the local case s=2, r=0 at speed nu < 1.

    u = sqrt(2(1-nu)) sech(sqrt(1-nu) x), which has mass 2 sqrt(1-nu).
    """
    b = math.sqrt(1.0 - nu)
    return Field(grid, math.sqrt(2.0) * b / np.cosh(b * grid.nodes))


def random_band_limited(rng, grid, band_fraction=0.25):
    """Random smooth real field supported on the low |band_fraction| band."""
    xi = grid.wavenumbers
    cutoff = band_fraction * np.max(np.abs(xi))
    spec = (rng.normal(size=xi.size) + 1j * rng.normal(size=xi.size)) * (np.abs(xi) <= cutoff)
    spec = 0.5 * (spec + np.conj(spec[np.r_[0, grid.npoints - 1:0:-1]]))
    spec[grid.npoints // 2] = 0.0
    return Field.from_spectrum(grid, spec)
