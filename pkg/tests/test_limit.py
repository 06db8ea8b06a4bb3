"""Limit model: Poisson-Boltzmann solves, the energy map, temperature root."""

import numpy as np
import pytest

from oracles import (fourier_grid, limit_temperature_fourier,
                     poisson_boltzmann_fourier)
from vpfp.dg import DGMesh, DGSpace, solve_poisson_ldg
from vpfp.errors import BracketError
from vpfp.limit import (EnergyBudget, LimitTracker, energy_of_temperature,
                        find_limit_temperature, solve_poisson_boltzmann,
                        vth_update)

L = 12.0
N = 12.0
K = 2 * np.pi / L


def ion_profile(x):
    return 1.0 + 0.2 * np.cos(K * x)


@pytest.fixture(scope="module")
def space64():
    return DGSpace(DGMesh(64, L, 2))


@pytest.fixture(scope="module")
def n_i_64(space64):
    return space64.project(ion_profile)


class TestPoissonBoltzmann:
    def test_homogeneous_equilibrium(self, space64):
        n_i = space64.project(lambda x: np.full_like(x, N / L))
        phi, c = solve_poisson_boltzmann(space64, n_i, 2.3, N)
        assert np.abs(phi.coeffs).max() < 1e-12
        assert c == pytest.approx(N / L, rel=1e-12)

    def test_matches_pseudospectral_oracle(self):
        space = DGSpace(DGMesh(256, L, 2))
        n_i = space.project(ion_profile)
        phi, c = solve_poisson_boltzmann(space, n_i, 1.0, N)
        xg = fourier_grid(256, L)
        phi_oracle, c_oracle = poisson_boltzmann_fourier(ion_profile(xg), 1.0, N, L)
        assert np.abs(phi(xg) - phi_oracle).max() < 1e-6
        assert c == pytest.approx(c_oracle, rel=1e-8)

    def test_high_temperature_linearizes(self, space64, n_i_64):
        phi, _ = solve_poisson_boltzmann(space64, n_i_64, 1e4, N)
        lin = solve_poisson_ldg(space64, space64.project(
            lambda x: ion_profile(x) - N / L))
        xs = np.linspace(0, L, 500, endpoint=False)
        assert np.abs(phi(xs) - lin.phi(xs)).max() < 1e-3

    def test_normalization_and_zero_mean(self, space64, n_i_64):
        phi, c = solve_poisson_boltzmann(space64, n_i_64, 0.7, N)
        assert abs(phi.integral()) < 1e-11
        vals = space64.values_at_quad(phi.coeffs)
        dens = c * np.exp(vals / 0.7)
        assert space64.integrate_quad_values(dens) == pytest.approx(N, rel=1e-10)

    def test_gauge_invariance_of_initial_guess(self, space64, n_i_64):
        phi1, c1 = solve_poisson_boltzmann(space64, n_i_64, 1.0, N)
        shifted = phi1.coeffs.copy()
        shifted[:, 0] += 7.5 * np.sqrt(space64.mesh.h)   # constant offset
        phi2, c2 = solve_poisson_boltzmann(space64, n_i_64, 1.0, N,
                                           phi0=shifted)
        assert np.abs(phi1.coeffs - phi2.coeffs).max() < 1e-10
        assert c1 == pytest.approx(c2, rel=1e-10)

    def test_incompatible_number_raises(self, space64, n_i_64):
        with pytest.raises(ValueError):
            solve_poisson_boltzmann(space64, n_i_64, 1.0, N + 1.0)

    def test_nonpositive_temperature_raises(self, space64, n_i_64):
        with pytest.raises(ValueError):
            solve_poisson_boltzmann(space64, n_i_64, 0.0, N)

    def test_residual_below_contract(self, space64, n_i_64):
        phi, c = solve_poisson_boltzmann(space64, n_i_64, 1.0, N)
        vals = space64.values_at_quad(phi.coeffs)
        dens = c * np.exp(vals / 1.0)
        res = (space64.laplacian @ phi.coeffs.ravel()
               + space64.coeffs_from_quad_values(dens).ravel()
               - n_i_64.coeffs.ravel())
        assert np.linalg.norm(res) < 1e-10 * max(1.0, np.linalg.norm(n_i_64.coeffs))


class TestEnergyMap:
    def test_constant_background_exact(self, space64):
        n_i = space64.project(lambda x: np.full_like(x, N / L))
        budget = EnergyBudget(10.0, N, ion_energy=3.0)
        e, _ = energy_of_temperature(space64, n_i, budget, 2.0)
        assert e == pytest.approx(N * 2.0 / 2 + 3.0, rel=1e-12)

    def test_monotone_on_log_grid(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        values = []
        warm = None
        for T in np.logspace(-3, 3, 20):
            e, phi = energy_of_temperature(space64, n_i_64, budget, T,
                                           phi0=None if warm is None else warm.coeffs)
            warm = phi
            values.append(e)
        assert np.all(np.diff(values) > 0)

    def test_monotone_spot_check(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        e1, _ = energy_of_temperature(space64, n_i_64, budget, 1.0)
        e2, _ = energy_of_temperature(space64, n_i_64, budget, 2.0)
        assert e2 > e1

    def test_low_temperature_limit_constant_background(self, space64):
        n_i = space64.project(lambda x: np.full_like(x, N / L))
        budget = EnergyBudget(10.0, N, ion_energy=3.0)
        e, _ = energy_of_temperature(space64, n_i, budget, 1e-8)
        assert e == pytest.approx(3.0, abs=1e-6)


class TestLimitTemperature:
    def test_constant_background_analytic_root(self, space64):
        n_i = space64.project(lambda x: np.full_like(x, N / L))
        budget = EnergyBudget(total_energy=3.0 + N / 2, particle_number=N,
                              ion_energy=3.0)
        state = find_limit_temperature(space64, n_i, budget)
        assert state.T_bar == pytest.approx(1.0, rel=1e-12)
        assert state.vth == pytest.approx(1.0, rel=1e-12)

    def test_residual_tolerance(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        state = find_limit_temperature(space64, n_i_64, budget)
        e, _ = energy_of_temperature(space64, n_i_64, budget, state.T_bar)
        assert abs(e - 20.0) < 1e-10 * 20.0

    def test_matches_fourier_oracle(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        state = find_limit_temperature(space64, n_i_64, budget)
        xg = fourier_grid(256, L)
        T_oracle = limit_temperature_fourier(ion_profile(xg), N, L, 20.0, 0.0)
        assert state.T_bar == pytest.approx(T_oracle, rel=1e-6)

    def test_budget_below_ion_energy_raises(self, space64, n_i_64):
        with pytest.raises(BracketError):
            find_limit_temperature(space64, n_i_64,
                                   EnergyBudget(1.0, N, ion_energy=2.0))

    def test_state_invariants(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        state = find_limit_temperature(space64, n_i_64, budget)
        assert abs(state.phi_bar.integral()) < 1e-10
        assert state.n_e_bar.integral() == pytest.approx(N, rel=1e-10)
        # pointwise Boltzmann relation at the quadrature nodes
        phi_q = space64.values_at_quad(state.phi_bar.coeffs)
        ne_q = space64.values_at_quad(state.n_e_bar.coeffs)
        assert np.abs(ne_q - state.c * np.exp(phi_q / state.T_bar)).max() < 1e-6

    def test_consistency_with_linear_poisson(self, space64, n_i_64):
        # the returned pair solves -phi'' = n_i - n_e when re-solved linearly
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        state = find_limit_temperature(space64, n_i_64, budget)
        from vpfp.dg import DGFunction
        rhs = DGFunction(space64, n_i_64.coeffs - state.n_e_bar.coeffs)
        lin = solve_poisson_ldg(space64, rhs)
        assert np.abs(lin.phi.coeffs - state.phi_bar.coeffs).max() < 1e-9


class TestVthUpdate:
    def test_static_limit_has_zero_rate(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        vth, rate, state = vth_update(space64, n_i_64, budget)
        assert rate == 0.0
        assert vth == pytest.approx(np.sqrt(state.T_bar))

    def test_backward_difference_rate(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        vth1, _, _ = vth_update(space64, n_i_64, budget)
        vth2, rate, _ = vth_update(space64, n_i_64,
                                   EnergyBudget(20.0, N, ion_energy=0.5),
                                   prev_vth=vth1, dt=0.1)
        assert vth2 < vth1          # energy moved into the ions
        assert rate == pytest.approx((vth2 - vth1) / (0.1 * vth2))

    def test_constant_energies_give_zero_rate(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        vth1, _, _ = vth_update(space64, n_i_64, budget)
        vth2, rate, _ = vth_update(space64, n_i_64, budget,
                                   prev_vth=vth1, dt=0.1)
        assert abs(rate) < 1e-10

    def test_tracker_matches_full_solve(self, space64, n_i_64):
        budget = EnergyBudget(20.0, N, ion_energy=0.0)
        tracker = LimitTracker(space64)
        s1 = tracker.solve(n_i_64, budget)
        ref = find_limit_temperature(space64, n_i_64, budget)
        assert s1.T_bar == pytest.approx(ref.T_bar, rel=1e-9)
        # nudge the ion energy like one time step would
        budget2 = EnergyBudget(20.0, N, ion_energy=1e-6)
        s2 = tracker.solve(n_i_64, budget2)
        ref2 = find_limit_temperature(space64, n_i_64, budget2)
        assert s2.T_bar == pytest.approx(ref2.T_bar, rel=1e-9)
