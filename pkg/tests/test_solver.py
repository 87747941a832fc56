"""Unit tests for the wave solvers: descent, Petviashvili, refinement, sweeps."""

import math
from dataclasses import replace

import numpy as np
import pytest

from solwave import functionals as fn
from solwave.solver import (
    SolveConfig,
    constrained_descent,
    continuation_sweep,
    longwave_initial_guess,
    petviashvili,
    preconditioned_refine,
    project_mass,
    recentre,
    solve,
)
from solwave.spectral import BesselSymbol, Field, l2_norm, make_grid, shift

from conftest import sech_wave


@pytest.fixture(scope="module")
def grid():
    return make_grid(200 * math.pi, 4096)


@pytest.fixture(scope="module")
def sech_cfg(grid):
    return SolveConfig(mu=0.4, disp=BesselSymbol(2.0), nl=BesselSymbol(0.0), grid=grid)


@pytest.fixture(scope="module")
def hybrid_sol(sech_cfg):
    return solve(replace(sech_cfg, method="hybrid"))


@pytest.fixture(scope="module")
def descent_rough(sech_cfg):
    cfg = replace(sech_cfg, method="descent", tol_residual=1e-6)
    return constrained_descent(cfg, longwave_initial_guess(cfg))


class TestConfigValidation:
    def test_exponent_assumption_enforced(self, grid):
        with pytest.raises(ValueError, match="s > 0 and r < s - 1"):
            SolveConfig(mu=0.4, disp=BesselSymbol(0.5), nl=BesselSymbol(0.0), grid=grid)

    def test_low_dispersion_regime_admitted(self, grid):
        cfg = SolveConfig(mu=0.4, disp=BesselSymbol(0.5), nl=BesselSymbol(-0.6), grid=grid)
        assert cfg.mu == 0.4

    def test_nonpositive_mass_rejected(self, grid):
        with pytest.raises(ValueError):
            SolveConfig(mu=0.0, disp=BesselSymbol(2.0), nl=BesselSymbol(0.0), grid=grid)

    def test_unknown_method_rejected(self, grid):
        with pytest.raises(ValueError):
            SolveConfig(
                mu=0.4, disp=BesselSymbol(2.0), nl=BesselSymbol(0.0), grid=grid, method="newton"
            )


class TestProjectionAndGuess:
    def test_projection_is_idempotent(self, grid, sech_cfg):
        u = longwave_initial_guess(sech_cfg)
        assert fn.mass(project_mass(u, 0.4)) == pytest.approx(0.4, rel=1e-14)
        assert np.allclose(project_mass(u, 0.4).values, u.values)

    def test_projection_undoes_scaling(self, grid, sech_cfg):
        u = longwave_initial_guess(sech_cfg)
        assert np.allclose(project_mass(2.0 * u, 0.4).values, u.values, rtol=1e-12)

    def test_projection_cosine(self):
        g = make_grid(2 * math.pi, 64)
        u = Field(g, np.cos(g.nodes))
        out = project_mass(u, math.pi)  # Q(cos) = π/2, so the scale is √2
        assert np.allclose(out.values, math.sqrt(2) * u.values, rtol=1e-12)

    def test_zero_field_rejected(self, grid):
        with pytest.raises(ValueError):
            project_mass(Field(grid, np.zeros(grid.npoints)), 0.4)

    def test_guess_mass_exact(self, grid):
        for theta in (0.05, 0.3, 1.0):
            cfg = SolveConfig(
                mu=0.17, disp=BesselSymbol(2.0), nl=BesselSymbol(0.0), grid=grid, theta0=theta
            )
            assert fn.mass(longwave_initial_guess(cfg)) == pytest.approx(0.17, rel=1e-13)

    def test_smaller_theta_widens_profile(self, grid, sech_cfg):
        narrow = longwave_initial_guess(replace(sech_cfg, theta0=0.5))
        wide = longwave_initial_guess(replace(sech_cfg, theta0=0.1))
        assert np.max(wide.values) < np.max(narrow.values)

    def test_unit_theta_peak(self, grid):
        cfg = SolveConfig(
            mu=0.4, disp=BesselSymbol(2.0), nl=BesselSymbol(0.0), grid=grid, theta0=1.0
        )
        u = longwave_initial_guess(cfg)
        # mass of exp(-x²/2) is √π/2, so the projected peak is √(μ/(√π/2))
        expected = math.sqrt(0.4 / (math.sqrt(math.pi) / 2))
        assert np.max(u.values) == pytest.approx(expected, rel=1e-8)


class TestConstrainedDescent:
    def test_sech_benchmark(self, sech_cfg):
        cfg = replace(sech_cfg, method="descent", tol_residual=1e-5)
        sol = constrained_descent(cfg, longwave_initial_guess(cfg))
        assert sol.converged
        assert sol.nu == pytest.approx(0.96, abs=1e-4)
        assert np.max(sol.u.values) == pytest.approx(math.sqrt(0.08), abs=1e-4)

    def test_exact_start_terminates_immediately(self, grid, sech_cfg):
        cfg = replace(sech_cfg, method="descent")
        sol = constrained_descent(cfg, sech_wave(grid, 0.96))
        assert sol.converged and sol.iterations <= 2

    def test_low_dispersion_regime(self, grid):
        cfg = SolveConfig(
            mu=0.2,
            disp=BesselSymbol(0.6),
            nl=BesselSymbol(-0.6),
            grid=grid,
            method="descent",
            tol_residual=1e-7,
        )
        sol = constrained_descent(cfg, longwave_initial_guess(cfg))
        assert sol.converged
        assert sol.nu < 1.0
        assert sol.residual_l2 <= 1e-7

    def test_zero_start_rejected(self, grid, sech_cfg):
        with pytest.raises(ValueError):
            constrained_descent(sech_cfg, Field(grid, np.zeros(grid.npoints)))

    def test_mass_constraint_held(self, sech_cfg):
        cfg = replace(sech_cfg, method="descent", tol_residual=1e-4)
        sol = constrained_descent(cfg, longwave_initial_guess(cfg))
        assert abs(fn.mass(sol.u) - 0.4) / 0.4 <= 1e-12


class TestPetviashvili:
    def test_sech_benchmark(self, grid, sech_cfg):
        guess = project_mass(sech_wave(grid, 0.95), 0.4)
        sol = petviashvili(0.96, sech_cfg, guess)
        assert sol.converged
        assert sol.mu == pytest.approx(0.4, abs=1e-5)
        assert l2_norm(sol.u - sech_wave(grid, 0.96)) <= 1e-5

    def test_exact_input_unit_stabilizer(self, grid, sech_cfg):
        u = sech_wave(grid, 0.96)
        numerator = 2 * fn.dispersion(u, sech_cfg.disp) - 0.96 * 2 * fn.mass(u)
        denominator = 4 * fn.nonlocal_quartic(u, sech_cfg.nl)
        assert numerator / denominator == pytest.approx(1.0, abs=1e-7)

    def test_supercritical_speed_rejected(self, grid, sech_cfg):
        with pytest.raises(ValueError):
            petviashvili(1.0, sech_cfg, sech_wave(grid, 0.96))


class TestPreconditionedRefine:
    def test_exact_solution_fixed_point(self, sech_cfg, hybrid_sol):
        refined = preconditioned_refine(hybrid_sol, sech_cfg, max_sweeps=5)
        assert l2_norm(refined.u - hybrid_sol.u) <= 1e-10

    def test_polish_reduces_descent_residual(self, sech_cfg, descent_rough):
        cfg = replace(sech_cfg, tol_residual=1e-9)
        polished = preconditioned_refine(descent_rough, cfg, max_sweeps=800)
        assert polished.residual_l2 <= 1e-9

    def test_inverse_multiplier_uniformly_bounded(self):
        # sup over ξ and small μ of ⟨ξ⟩ˢ-type quotient (Λˢ-ν+1)⁻¹ stays ≤ 1
        xi = np.linspace(0, 1e4, 10001)
        for s in (0.6, 2.0, 3.0):
            weights = (1 + xi**2) ** (s / 2)
            for nu in (0.0, 0.5, 0.99999):
                assert np.max(1.0 / (weights - nu + 1.0)) <= 1.0


class TestRecentre:
    def test_centered_profile_unchanged(self, grid):
        u = sech_wave(grid, 0.96)
        assert l2_norm(recentre(u) - u) <= 1e-12

    def test_shifted_profile_recovered(self, grid):
        u = sech_wave(grid, 0.96)
        moved = shift(u, 17 * grid.spacing)
        back = recentre(moved)
        assert l2_norm(back - u) <= 1e-3 * l2_norm(u)

    def test_subgrid_shift_recovered(self, grid):
        u = sech_wave(grid, 0.96)
        moved = shift(u, 3.7 * grid.spacing)
        back = recentre(moved)
        assert l2_norm(back - u) <= 1e-3 * l2_norm(u)

    def test_constant_field_unchanged(self, grid):
        u = Field(grid, np.full(grid.npoints, 2.0))
        assert np.allclose(recentre(u).values, u.values)


class TestSolveAndSweep:
    def test_hybrid_reaches_deep_residual(self, hybrid_sol):
        assert hybrid_sol.converged
        assert hybrid_sol.residual_l2 <= 1e-8
        assert hybrid_sol.nu == pytest.approx(0.96, abs=1e-6)

    def test_methods_agree_after_recentring(self, sech_cfg, hybrid_sol, descent_rough):
        # compare fully converged endpoints: the cross-method gap shrinks in
        # proportion to the residuals, so the descent one is polished first
        cfg = replace(sech_cfg, tol_residual=1e-9)
        descent = preconditioned_refine(descent_rough, cfg, max_sweeps=800, target_mu=0.4)
        assert descent.residual_l2 <= 1e-9
        assert l2_norm(recentre(hybrid_sol.u) - recentre(descent.u)) <= 1e-6

    def test_translation_invariance(self, grid, sech_cfg):
        cfg = replace(sech_cfg, method="hybrid", auto_enlarge=False)
        centered = solve(cfg)
        moved = solve(cfg, shift(longwave_initial_guess(cfg), 12.3))
        assert l2_norm(recentre(centered.u) - recentre(moved.u)) <= 1e-6

    def test_sweep_matches_family(self, grid):
        cfg = SolveConfig(
            mu=0.5,
            disp=BesselSymbol(2.0),
            nl=BesselSymbol(0.0),
            grid=grid,
            method="hybrid",
            continuation=tuple(np.linspace(0.05, 0.5, 10)),
        )
        records, solutions = continuation_sweep(cfg)
        assert len(records) == len(solutions) == 10
        assert all(rec.converged for rec in records)
        for rec in records:
            assert rec.nu == pytest.approx(1 - rec.mu**2 / 4, abs=1e-3)

    def test_singleton_sweep_equals_solve(self, sech_cfg, hybrid_sol):
        records, solutions = continuation_sweep(
            replace(sech_cfg, method="hybrid", continuation=(0.4,))
        )
        assert len(records) == 1
        assert l2_norm(solutions[0].u - hybrid_sol.u) <= 1e-8

    def test_unsorted_sweep_rejected(self, sech_cfg):
        with pytest.raises(ValueError):
            continuation_sweep(replace(sech_cfg, continuation=(0.4, 0.2)))

    def test_unreachable_tolerance_flags_row(self, grid):
        cfg = SolveConfig(
            mu=0.4,
            disp=BesselSymbol(2.0),
            nl=BesselSymbol(0.0),
            grid=grid,
            method="descent",
            tol_residual=1e-15,
            max_iter=40,
            continuation=(0.2, 0.4),
        )
        records, _ = continuation_sweep(cfg)
        assert len(records) == 2
        assert not any(rec.converged for rec in records)

    def test_converged_energy_below_mass(self, hybrid_sol):
        assert hybrid_sol.values.energy < hybrid_sol.mu

    def test_small_mass_box_enlargement(self):
        small = make_grid(50 * math.pi, 1024)
        cfg = SolveConfig(
            mu=0.05, disp=BesselSymbol(2.0), nl=BesselSymbol(0.0), grid=small, method="hybrid"
        )
        sol = solve(cfg)
        assert sol.converged
        assert sol.u.grid.length > small.length
