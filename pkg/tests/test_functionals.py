"""Unit tests for the variational functionals and their gradients."""

import math

import numpy as np
import pytest

from solwave import functionals as fn
from solwave.spectral import BesselSymbol, Field, inner, l2_norm, make_grid

from conftest import random_band_limited, sech_wave


class TestMass:
    def test_cosine(self, small_grid):
        u = Field(small_grid, np.cos(small_grid.nodes))
        assert fn.mass(u) == pytest.approx(math.pi / 2, rel=1e-12)

    def test_zero(self, small_grid):
        assert fn.mass(Field(small_grid, np.zeros(small_grid.npoints))) == 0.0

    def test_sech_family_member(self, wave_grid):
        # A sech(Bx) with A² = 0.08, B = 0.2: mass = A²/B = 0.4 up to box tails
        u = Field(wave_grid, math.sqrt(0.08) / np.cosh(0.2 * wave_grid.nodes))
        assert fn.mass(u) == pytest.approx(0.4, abs=1e-6)


class TestDispersion:
    def test_cosine_order_two(self, small_grid):
        u = Field(small_grid, np.cos(small_grid.nodes))
        assert fn.dispersion(u, BesselSymbol(2.0)) == pytest.approx(math.pi, rel=1e-12)

    def test_constant(self, small_grid):
        c = 1.7
        u = Field(small_grid, np.full(small_grid.npoints, c))
        expected = 0.5 * c**2 * small_grid.length
        for s in (0.6, 2.0, 3.0):
            assert fn.dispersion(u, BesselSymbol(s)) == pytest.approx(expected, rel=1e-12)

    def test_two_modes(self, small_grid):
        u = Field(small_grid, np.cos(small_grid.nodes) + np.cos(2 * small_grid.nodes))
        assert fn.dispersion(u, BesselSymbol(2.0)) == pytest.approx(3.5 * math.pi, rel=1e-12)


class TestNonlocalQuartic:
    def test_cosine_r_zero(self, small_grid):
        u = Field(small_grid, np.cos(small_grid.nodes))
        assert fn.nonlocal_quartic(u, BesselSymbol(0.0)) == pytest.approx(
            3 * math.pi / 16, rel=1e-12
        )

    def test_cosine_general_r(self, small_grid):
        u = Field(small_grid, np.cos(small_grid.nodes))
        for r in (-0.6, 0.1, 1.5):
            expected = math.pi / 8 + 5 ** (r / 2) * math.pi / 16
            assert fn.nonlocal_quartic(u, BesselSymbol(r)) == pytest.approx(expected, rel=1e-12)

    def test_zero_field(self, small_grid):
        z = Field(small_grid, np.zeros(small_grid.npoints))
        assert fn.nonlocal_quartic(z, BesselSymbol(0.3)) == 0.0


class TestEnergy:
    def test_cosine_assembly(self, small_grid):
        u = Field(small_grid, np.cos(small_grid.nodes))
        vals = fn.energy(u, BesselSymbol(2.0), BesselSymbol(0.0))
        assert vals.mass == pytest.approx(math.pi / 2, rel=1e-12)
        assert vals.dispersion == pytest.approx(math.pi, rel=1e-12)
        assert vals.nonlinearity == pytest.approx(3 * math.pi / 16, rel=1e-12)
        assert vals.energy == pytest.approx(13 * math.pi / 16, rel=1e-12)
        assert vals.energy == vals.dispersion - vals.nonlinearity

    def test_zero_field(self, small_grid, bessel_pair):
        vals = fn.energy(Field(small_grid, np.zeros(small_grid.npoints)), *bessel_pair)
        assert (vals.mass, vals.dispersion, vals.nonlinearity, vals.energy) == (0, 0, 0, 0)

    def test_homogeneity(self, small_grid, bessel_pair):
        rng = np.random.default_rng(31)
        u = random_band_limited(rng, small_grid)
        one = fn.energy(u, *bessel_pair)
        two = fn.energy(2.0 * u, *bessel_pair)
        assert two.mass == pytest.approx(4 * one.mass, rel=1e-12)
        assert two.dispersion == pytest.approx(4 * one.dispersion, rel=1e-12)
        assert two.nonlinearity == pytest.approx(16 * one.nonlinearity, rel=1e-12)

    def test_positivity_with_bessel_symbols(self, small_grid):
        rng = np.random.default_rng(37)
        for k in range(5):
            u = random_band_limited(rng, small_grid)
            vals = fn.energy(u, BesselSymbol(1.3), BesselSymbol(-0.4))
            assert vals.dispersion >= vals.mass
            assert vals.nonlinearity >= 0.0


class TestGradient:
    def test_zero_field(self, small_grid, bessel_pair):
        z = Field(small_grid, np.zeros(small_grid.npoints))
        assert l2_norm(fn.gradient_energy(z, *bessel_pair)) == 0.0

    def test_cosine_closed_form(self, small_grid):
        u = Field(small_grid, np.cos(small_grid.nodes))
        grad = fn.gradient_energy(u, BesselSymbol(2.0), BesselSymbol(0.0))
        expected = 2 * np.cos(small_grid.nodes) - np.cos(small_grid.nodes) ** 3
        assert np.allclose(grad.values, expected, atol=1e-12)

    def test_directional_derivative_order(self, small_grid, bessel_pair):
        # |E(u+εh) - E(u) - ε<E'(u),h>| should shrink like ε²
        rng = np.random.default_rng(41)
        u = random_band_limited(rng, small_grid)
        h = random_band_limited(rng, small_grid)
        grad = fn.gradient_energy(u, *bessel_pair)
        base = fn.energy(u, *bessel_pair).energy
        errors = []
        for eps in (1e-3, 1e-4):
            lhs = fn.energy(u + eps * h, *bessel_pair).energy - base
            errors.append(abs(lhs - eps * inner(grad, h)))
        assert errors[1] <= errors[0] * 1e-2 * 3  # ratio ≈ (1e-4/1e-3)² = 1e-2

    def test_finite_difference_relative_error(self, small_grid, bessel_pair):
        rng = np.random.default_rng(43)
        u = random_band_limited(rng, small_grid)
        h = random_band_limited(rng, small_grid)
        grad = fn.gradient_energy(u, *bessel_pair)
        eps = 1e-5
        central = (
            fn.energy(u + eps * h, *bessel_pair).energy
            - fn.energy(u + (-eps) * h, *bessel_pair).energy
        ) / (2 * eps)
        directional = inner(grad, h)
        assert abs(central - directional) / abs(directional) <= 1e-6


class TestResidualAndSpeed:
    def test_sech_residual_small(self, wave_grid):
        u = sech_wave(wave_grid, 0.96)
        assert fn.residual_l2(u, 0.96, BesselSymbol(2.0), BesselSymbol(0.0)) <= 1e-8

    def test_zero_field_zero_residual(self, small_grid, bessel_pair):
        z = Field(small_grid, np.zeros(small_grid.npoints))
        assert l2_norm(fn.el_residual(z, 0.5, *bessel_pair)) == 0.0

    def test_rayleigh_cosine(self, small_grid):
        u = Field(small_grid, np.cos(small_grid.nodes))
        nu = fn.wave_speed_rayleigh(u, BesselSymbol(2.0), BesselSymbol(0.0))
        assert nu == pytest.approx(1.25, rel=1e-12)

    def test_rayleigh_orthogonality(self, small_grid, bessel_pair):
        rng = np.random.default_rng(47)
        for k in range(3):
            u = random_band_limited(rng, small_grid)
            nu = fn.wave_speed_rayleigh(u, *bessel_pair)
            res = fn.el_residual(u, nu, *bessel_pair)
            assert abs(inner(res, u)) <= 1e-10 * l2_norm(res) * l2_norm(u) + 1e-14

    def test_rayleigh_sech_family(self, wave_grid):
        u = sech_wave(wave_grid, 0.96)
        nu = fn.wave_speed_rayleigh(u, BesselSymbol(2.0), BesselSymbol(0.0))
        assert nu == pytest.approx(0.96, abs=1e-6)

    def test_rayleigh_scale_invariant_linear_part(self, small_grid):
        # with the quartic term absent the quotient is invariant under scaling

        class Zero:
            exponent = 0.0

            def __call__(self, xi):
                return np.zeros_like(np.asarray(xi, dtype=float))

        rng = np.random.default_rng(53)
        u = random_band_limited(rng, small_grid)
        disp, zero = BesselSymbol(2.0), Zero()
        assert fn.wave_speed_rayleigh(3.0 * u, disp, zero) == pytest.approx(
            fn.wave_speed_rayleigh(u, disp, zero), rel=1e-12
        )

    def test_zero_field_speed_rejected(self, small_grid, bessel_pair):
        with pytest.raises(ValueError):
            fn.wave_speed_rayleigh(Field(small_grid, np.zeros(small_grid.npoints)), *bessel_pair)
