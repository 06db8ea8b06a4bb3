"""Diagnostic records, snapshots, and the series writer."""

from dataclasses import replace

import numpy as np
import pytest

from vpfp.diagnostics import (SeriesWriter, compute_record,
                              snapshot_distribution)
from vpfp.hermite import basis_function_table, gauss_hermite_rule
from vpfp.integrator import KineticStepper, crank_nicolson_step, initialize_state
from vpfp.scenarios import ScenarioConfig, preset_config

SQRT_2PI = np.sqrt(2.0 * np.pi)


@pytest.fixture(scope="module")
def small_state():
    cfg = replace(preset_config("one_species_5_1"), N_x=16, N_H=24, t_end=0.1)
    state, space = initialize_state(cfg)
    return cfg, state, space


@pytest.fixture(scope="module")
def equilibrium_state():
    cfg = ScenarioConfig(scenario="two_species_simplified", eps=0.5,
                         nu_ee=0.5, nu_ei=0.1, kappa=0.0, ion_amp=0.0,
                         Ti0=1.0, N_x=8, N_H=8, dt=0.002, t_end=0.02,
                         adaptive_enabled=False)
    state, space = initialize_state(cfg)
    return cfg, state, space


class TestComputeRecord:
    def test_t0_deviations_are_zero(self, small_state):
        cfg, state, space = small_state
        rec0 = compute_record(state, space, cfg)
        assert rec0.mass_dev == rec0.momentum_dev == rec0.energy_dev == 0.0
        rec = compute_record(state, space, cfg, baseline=rec0)
        assert rec.mass_dev == 0.0 and rec.energy_dev == 0.0

    def test_equilibrium_record_vanishing_deviations(self, equilibrium_state):
        cfg, state, space = equilibrium_state
        rec = compute_record(state, space, cfg)
        assert rec.u_l2 < 1e-9
        assert rec.T_dev_l2 < 1e-8
        assert rec.phi_dev < 1e-9
        assert np.all(rec.l2_alpha < 1e-9)

    def test_homogeneous_energy_value(self, equilibrium_state):
        # energy = (1/2) vth^2 n L + (1/2) n_e_total Ti with no field
        cfg, state, space = equilibrium_state
        rec = compute_record(state, space, cfg)
        expected = 0.5 * state.basis.vth ** 2 * 12.0 + 0.5 * 12.0 * state.Ti
        assert rec.energy == pytest.approx(expected, rel=1e-9)
        assert rec.potential_energy < 1e-12

    def test_energy_against_dense_quadrature(self, small_state):
        # kinetic + field energy recomputed from the reconstructed f
        cfg, state, space = small_state
        rec = compute_record(state, space, cfg)
        basis = state.basis
        v, w = gauss_hermite_rule(256, basis.vth)
        psi = basis_function_table(basis, v)
        aq = space.values_at_quad(state.coeffs.coeffs)
        f = np.einsum("kjq,kv->jqv", aq, psi)
        kinetic = 0.5 * space.integrate_quad_values(
            np.einsum("jqv,v,v->jq", f, v ** 2, w))
        total = kinetic + state.field.potential_energy
        assert rec.energy == pytest.approx(total, rel=1e-8)

    def test_entropy_decreases_in_homogeneous_relaxation(self):
        # pure Fokker-Planck: no transport, entropy must not increase
        cfg = ScenarioConfig(scenario="two_species_simplified", eps=1.0,
                             nu_ee=1.0, nu_ei=0.0, kappa=0.0, ion_amp=0.0,
                             Ti0=1.0, N_x=8, N_H=24, dt=0.01, t_end=0.5,
                             adaptive_enabled=False)
        state, space = initialize_state(cfg)
        # deform velocity space away from equilibrium, uniformly in x
        state.coeffs.coeffs[4, :, 0] += 0.05 * np.sqrt(space.mesh.h)
        stepper = KineticStepper(space, cfg, n_e_total=state.budget.particle_number)
        entropies = [compute_record(state, space, cfg).entropy]
        for _ in range(25):
            state = crank_nicolson_step(state, stepper)
            entropies.append(compute_record(state, space, cfg).entropy)
        diffs = np.diff(entropies)
        assert (diffs <= 1e-8).all()
        assert entropies[-1] < entropies[0]

    def test_potential_energy_nonnegative(self, small_state):
        cfg, state, space = small_state
        rec = compute_record(state, space, cfg)
        assert rec.potential_energy >= 0.0

    def test_exchange_rhs_zero_without_cross_collisions(self, small_state):
        cfg, state, space = small_state
        rec = compute_record(state, space, cfg)
        assert rec.entropy_exchange_rhs == 0.0


class TestSnapshot:
    def test_equilibrium_slices_proportional(self, equilibrium_state):
        cfg, state, space = equilibrium_state
        x, v, f = snapshot_distribution(state, space, 8, 4.0, 33)
        # every x-slice is the same Gaussian up to the (flat) density
        ratios = f / f[0][None, :]
        assert np.abs(ratios - 1.0).max() < 1e-9

    def test_two_stream_bimodal_profile(self, small_state):
        cfg, state, space = small_state
        x, v, f = snapshot_distribution(state, space, 64, 4.0, 201)
        # at the u0 extremum the v-profile has two local maxima
        i = np.argmin(np.abs(x - 3.0))
        prof = f[i]
        interior = prof[1:-1]
        peaks = np.flatnonzero((interior > prof[:-2]) & (interior > prof[2:]))
        # ignore sub-percent Hermite tail wiggles near the window edge
        peaks = peaks[interior[peaks] > 0.1 * prof.max()]
        assert len(peaks) == 2

    def test_single_point_grid(self, small_state):
        from vpfp.hermite import reconstruct_distribution
        cfg, state, space = small_state
        x, v, f = snapshot_distribution(state, space, 1, 3.0, 1)
        assert f.shape == (1, 1)
        direct = reconstruct_distribution(state.basis, state.coeffs, space,
                                          x[0], v[0])
        assert f[0, 0] == pytest.approx(direct, rel=1e-14)


class TestSeriesWriter:
    def test_csv_layout_and_flush(self, tmp_path, small_state):
        cfg, state, space = small_state
        writer = SeriesWriter(str(tmp_path / "run"), cfg)
        writer.record(state, space)
        writer.snapshot(state, space)
        writer.flush()
        lines = (tmp_path / "run" / "series.csv").read_text().splitlines()
        header = lines[0].split(",")
        assert header[0] == "time"
        assert "l2_alpha_6" in header
        assert len(lines) == 2
        assert len(lines[1].split(",")) == len(header)
        snaps = list((tmp_path / "run" / "snapshots").iterdir())
        assert len(snaps) == 1
        content = snaps[0].read_text()
        assert content.startswith("# time =")
        data = np.loadtxt(snaps[0])
        assert data.shape == (cfg.snapshot_nx, cfg.snapshot_nv)
