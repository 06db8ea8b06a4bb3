"""Scenario configs, presets, initial data, admissibility."""

import numpy as np
import pytest

from vpfp.dg import DGMesh, DGSpace
from vpfp.errors import AdmissibilityError, ConfigError
from vpfp.hermite import HermiteBasis, HermiteCoefficients, project_initial_data
from vpfp.scenarios import (ScenarioConfig, initial_electron_distribution,
                            ion_background, momentum_admissibility_check,
                            preset_config, preset_names)

SQRT_2PI = np.sqrt(2.0 * np.pi)


class TestConfig:
    def test_one_species_forces_eps_and_nu_ei(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="one_species", eps=0.5)
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="one_species", nu_ei=0.1)

    def test_wave_number_derived(self):
        cfg = ScenarioConfig(L=24.0)
        assert cfg.wave_number == pytest.approx(np.pi / 12.0)

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="three_species")

    def test_validation_bounds(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(N_H=2)
        with pytest.raises(ConfigError):
            ScenarioConfig(dt=0.0)
        with pytest.raises(ConfigError):
            ScenarioConfig(adaptive_min_mode=2)

    def test_ini_round_trip_all_presets(self):
        for name in preset_names():
            cfg = preset_config(name)
            assert ScenarioConfig.from_ini(cfg.to_ini()) == cfg

    def test_ini_rejects_unknown_keys(self):
        cfg = preset_config("one_species_5_1")
        text = cfg.to_ini() + "\n[scenario]\nmystery = 1\n"
        with pytest.raises(ConfigError):
            ScenarioConfig.from_ini(text)

    def test_ini_reports_bad_values(self):
        text = "[time]\ndt = fast\n"
        with pytest.raises(ConfigError):
            ScenarioConfig.from_ini(text)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset_config("nope")


class TestInitialData:
    def test_one_species_point_value(self):
        cfg = preset_config("one_species_5_1")
        f0 = initial_electron_distribution(cfg)
        # u0(0) = 0: the printed prefactor value
        assert f0(0.0, 0.0) == pytest.approx(1.0 / (6.0 * SQRT_2PI))
        assert f0(0.0, 0.0) == pytest.approx(0.0664904, abs=1e-7)

    def test_two_species_point_value(self):
        cfg = preset_config("two_species_5_2")
        f0 = initial_electron_distribution(cfg)
        assert f0(0.0, 0.0) == pytest.approx(1.01 / SQRT_2PI)
        assert f0(0.0, 0.0) == pytest.approx(0.4029317, abs=1e-7)

    def test_two_species_zero_kappa_homogeneous(self):
        cfg = ScenarioConfig(scenario="two_species_simplified", eps=0.1,
                             nu_ei=0.1, kappa=0.0, N_H=8, N_x=8, dt=1e-4,
                             t_end=1e-3)
        f0 = initial_electron_distribution(cfg)
        x = np.linspace(0, 12, 7)
        assert np.ptp(f0(x, 1.3 * np.ones_like(x))) == 0.0

    def test_ion_backgrounds(self):
        one = ion_background(preset_config("one_species_5_1"))
        assert not one.maxwellian
        assert one(0.0) == pytest.approx(1.1)
        two = ion_background(preset_config("two_species_5_2"))
        assert two.maxwellian and two.Ti0 == 1.0
        assert two(6.0) == pytest.approx(0.8)    # 1 + 0.2 cos(pi)

    def test_ion_number_is_L(self):
        space = DGSpace(DGMesh(16, 12.0, 2))
        for name in ("one_species_5_1", "two_species_5_2"):
            ion = ion_background(preset_config(name))
            n_i = space.project(ion.density)
            assert n_i.integral() == pytest.approx(12.0, rel=1e-12)


class TestMomentumAdmissibility:
    def setup_method(self):
        self.space = DGSpace(DGMesh(16, 12.0, 2))
        self.cfg = preset_config("one_species_5_1")

    def _project(self, f0):
        basis = HermiteBasis(16, 1.7)
        return basis, project_initial_data(basis, f0, self.space)

    def test_odd_velocity_profile_passes(self):
        f0 = initial_electron_distribution(self.cfg)
        basis, coeffs = self._project(f0)
        val = momentum_admissibility_check(self.cfg, basis, coeffs, self.space)
        assert abs(val) < 1e-10

    def test_shifted_profile_fails(self):
        k = self.cfg.wave_number

        def f0(x, v):
            u0 = 0.5 * np.sin(k * x) + 0.1
            return np.exp(-0.5 * (v - u0) ** 2) / SQRT_2PI

        basis, coeffs = self._project(f0)
        with pytest.raises(AdmissibilityError):
            momentum_admissibility_check(self.cfg, basis, coeffs, self.space)

    def test_zero_velocity_passes(self):
        def f0(x, v):
            return np.ones_like(x) * np.exp(-0.5 * v ** 2) / SQRT_2PI

        basis, coeffs = self._project(f0)
        assert momentum_admissibility_check(self.cfg, basis, coeffs,
                                            self.space) == pytest.approx(0.0, abs=1e-13)

    def test_two_species_not_gated(self):
        # the check reports but does not gate the two-species scenario
        cfg = preset_config("two_species_5_2")
        k = cfg.wave_number

        def f0(x, v):
            u0 = 0.1
            return np.exp(-0.5 * (v - u0) ** 2) / SQRT_2PI * np.ones_like(x)

        basis, coeffs = self._project(f0)
        val = momentum_admissibility_check(cfg, basis, coeffs, self.space)
        assert val == pytest.approx(0.1 * 12.0, rel=1e-6)
