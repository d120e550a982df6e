import math

import numpy as np
import pytest

import q3heat as qh
from q3heat.errors import (
    DegenerateQubits,
    NonPositiveFrequency,
    OrderingViolation,
    ResonanceViolation,
)

from conftest import make_config


class TestDeviceParams:
    def test_fig2_parameters_valid(self):
        p = qh.DeviceParams(0.9, 0.1, 1.0, 0.01)
        assert p.omega_M == pytest.approx(0.1)

    def test_resonant_derives_omega_m_exactly(self):
        p = qh.DeviceParams.resonant(0.9, 0.05)
        assert p.omega_L + p.omega_M == p.omega_R

    def test_equal_frequencies_degenerate(self):
        with pytest.raises(DegenerateQubits):
            qh.DeviceParams(0.5, 0.5, 1.0, 0.1)

    def test_resonance_violation(self):
        with pytest.raises(ResonanceViolation):
            qh.DeviceParams(0.6, 0.3, 1.0, 0.1)

    def test_ordering_violation(self):
        with pytest.raises(OrderingViolation):
            qh.DeviceParams(0.3, 0.7, 1.0, 0.1)

    def test_nonpositive_inputs(self):
        with pytest.raises(OrderingViolation):
            qh.DeviceParams(0.9, 0.1, 1.0, 0.0)
        with pytest.raises(OrderingViolation):
            qh.DeviceParams(-0.9, 1.9, 1.0, 0.1)

    def test_validate_params_requires_three_labels(self):
        p = qh.DeviceParams.resonant(0.9, 0.01)
        baths = [qh.BathSpec(lab, 0.1, 1e-4) for lab in ("L", "M", "M")]
        with pytest.raises(OrderingViolation):
            qh.validate_params(p, baths)


class TestBathSpec:
    def test_detached_and_cold_are_legal(self):
        assert not qh.BathSpec("L", 0.0, 0.0).attached
        assert qh.BathSpec("R", 0.0, 1e-4).attached

    def test_negative_temperature_rejected(self):
        with pytest.raises(OrderingViolation):
            qh.BathSpec("L", -0.1, 1e-4)

    def test_spectrum_coerced_from_string(self):
        assert qh.BathSpec("L", 0.1, 1e-4, "ohmic").spectrum is qh.Spectrum.OHMIC


class TestThermalOccupation:
    def test_ln2_temperature_gives_unity(self):
        for x in (0.1, 1.0, 10.0):
            assert qh.thermal_occupation(x, x / math.log(2.0)) == pytest.approx(1.0, rel=1e-14)

    def test_zero_temperature(self):
        assert qh.thermal_occupation(1.0, 0.0) == 0.0

    def test_unit_point_high_precision(self):
        # 1/(e - 1) evaluated at 30 digits: 0.581976706869326424385...
        assert qh.thermal_occupation(1.0, 1.0) == pytest.approx(0.5819767068693264, abs=1e-15)

    def test_small_ratio_no_cancellation(self):
        # 30-digit value of 1/(exp(1e-12) - 1)
        assert qh.thermal_occupation(1e-12, 1.0) == pytest.approx(999999999999.5, rel=1e-13)

    def test_monotonic_in_temperature_and_frequency(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            w, t = rng.uniform(0.01, 2.0), rng.uniform(0.01, 2.0)
            assert qh.thermal_occupation(w, t * 1.1) > qh.thermal_occupation(w, t)
            assert qh.thermal_occupation(w * 1.1, t) < qh.thermal_occupation(w, t)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(NonPositiveFrequency):
            qh.thermal_occupation(0.0, 1.0)
        with pytest.raises(NonPositiveFrequency):
            qh.thermal_occupation(-1.0, 1.0)


class TestSpectralFunctions:
    def test_damping_rate_flat_and_ohmic(self):
        flat = qh.BathSpec("L", 0.1, 1e-4, "flat")
        ohmic = qh.BathSpec("L", 0.1, 1e-4, "ohmic")
        assert qh.damping_rate(flat, 0.37) == 1e-4
        assert qh.damping_rate(ohmic, 0.5) == pytest.approx(5e-5, rel=1e-15)
        assert qh.damping_rate(qh.BathSpec("L", 0.1, 0.0), 0.5) == 0.0

    def test_ohmic_linear_flat_constant(self):
        flat = qh.BathSpec("L", 0.1, 3e-4, "flat")
        ohmic = qh.BathSpec("L", 0.1, 3e-4, "ohmic")
        ws = np.linspace(0.1, 2.0, 9)
        assert all(qh.damping_rate(flat, w) == 3e-4 for w in ws)
        vals = np.array([qh.damping_rate(ohmic, w) for w in ws])
        assert np.allclose(vals, 3e-4 * ws, rtol=1e-15)

    def test_zero_temperature_emission_only(self):
        bath = qh.BathSpec("L", 0.0, 1e-4)
        assert qh.spectral_density(bath, +0.5) == 0.0
        assert qh.spectral_density(bath, -0.5) == pytest.approx(1e-4, rel=1e-15)

    def test_absorption_weight_composes_with_occupation(self):
        bath = qh.BathSpec("L", 0.2, 1e-4)
        # n(0.1, 0.2) = 1/(exp(0.5) - 1) = 1.54149408253679828... (30 digits)
        assert qh.spectral_density(bath, +0.1) == pytest.approx(1e-4 * 1.5414940825367982, rel=1e-14)

    def test_detailed_balance_gap_and_ratio(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            w = rng.uniform(0.05, 2.0)
            t = rng.uniform(0.05, 2.0)
            bath = qh.BathSpec("M", t, 10.0 ** rng.uniform(-5, -3))
            up = qh.spectral_density(bath, +w)
            down = qh.spectral_density(bath, -w)
            assert down >= 0.0 and up >= 0.0
            assert down - up == pytest.approx(bath.gamma, rel=1e-10)
            assert down / up == pytest.approx(math.exp(w / t), rel=1e-12)


class TestSecularReport:
    def test_fig2_is_comfortably_secular(self, fig2_config):
        rep = qh.secular_report(fig2_config)
        assert rep.valid
        assert rep.max_gamma == pytest.approx(1e-4)
        assert 0.0 < rep.ratio < 0.1

    def test_large_gamma_warns(self):
        config = make_config(0.9, 0.01, (0.2, 0.1, 0.02), gamma=0.1)
        rep = qh.secular_report(config)
        assert not rep.valid
        assert rep.ratio >= 0.1

    def test_detached_baths_do_not_contribute(self):
        config = make_config(0.9, 0.01, (0.2, 0.1, 0.02), gammas=(0.0, 1e-4, 1e-4))
        rep = qh.secular_report(config)
        assert rep.max_gamma == pytest.approx(1e-4)

    def test_ohmic_effective_gamma(self, fig4b_config):
        rep = qh.secular_report(fig4b_config)
        freqs = qh.bohr_frequencies(fig4b_config.params)
        assert rep.max_gamma == pytest.approx(1e-4 * max(freqs.values()), rel=1e-12)
