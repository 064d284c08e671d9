import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_readout.dispersive import (CalibrationParams, CouplingSpec, chi_pair, chi_total,
                                      coupling, dispersive_model, dressed_transition,
                                      pi_amplitudes, rabi_angle_first, rabi_angle_second,
                                      two_photon_factor)
from qudit_readout.errors import DomainError, ResonanceError
from qudit_readout.presets import G, OMEGA_R, reference_model, reference_transmon
from qudit_readout.spectrum import eigenenergies
from qudit_readout.units import MHZ

levels = st.lists(st.floats(0.5, 3.0), min_size=5, max_size=8).map(
    lambda gaps: np.concatenate(([0.0], np.cumsum(gaps))))


def shifts_by_hand(omega, g, omega_r, d):
    """Plain-loop evaluation of the pair and total shifts."""
    pairs = []
    for j in range(d):
        pairs.append(g * g * (j + 1) / (omega[j + 1] - omega[j] - omega_r))
    totals = [(pairs[j - 1] if j else 0.0) - pairs[j] for j in range(d)]
    return pairs, totals


class TestCoupling:
    def test_ladder(self):
        assert coupling(1.5, 0) == 1.5
        assert coupling(1.5, 3) == 3.0
        assert coupling(100 * MHZ, 1) / MHZ == pytest.approx(141.42, abs=5e-3)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            CouplingSpec(g=0.0, omega_r=1.0)
        with pytest.raises(ValueError):
            CalibrationParams(omega_q=1.0, omega_d=1.0, durations={(0, 1): 0.0})


class TestChi:
    def test_direct_value(self):
        assert chi_pair([0.0, 5.0], 1.0, 4.0, 0) == 1.0

    def test_detuning_sign(self):
        assert chi_pair([0.0, 3.0], 1.0, 4.0, 0) == -1.0

    def test_resonance(self):
        with pytest.raises(ResonanceError):
            chi_pair([0.0, 4.0 + 1e-9], 1.0, 4.0, 0)

    def test_ground_state_total(self):
        omega = [0.0, 5.0, 9.0]
        assert chi_total(omega, 1.0, 4.0, 0) == -chi_pair(omega, 1.0, 4.0, 0)

    def test_two_level_truncation(self):
        omega = [0.0, 5.0]
        assert chi_total(omega, 1.0, 4.0, 1) == chi_pair(omega, 1.0, 4.0, 0)

    def test_reference_model_against_hand_loop(self):
        model = reference_model(4)
        omega = model.omega_tilde - np.concatenate(([0.0], model.chi_pair[:-1]))
        bare = eigenenergies(reference_transmon(), 5).levels_ng0
        np.testing.assert_allclose(omega, bare[:4])
        pairs, totals = shifts_by_hand(bare, G, OMEGA_R, 4)
        np.testing.assert_allclose(model.chi_pair, pairs, rtol=1e-12)
        np.testing.assert_allclose(model.chi, totals, rtol=1e-12)
        # frozen reference values (MHz, divided by 2 pi)
        np.testing.assert_allclose(model.chi / MHZ, [5.02059, 3.56378, 2.49438, 1.22300],
                                   atol=1e-4)

    def test_model_shapes(self):
        model = dispersive_model([0.0, 5.0, 9.0, 12.0], 0.1, 7.0)
        assert model.d == 3
        np.testing.assert_allclose(model.omega_tilde_r, 7.0 + model.chi)
        with pytest.raises(ValueError):
            dispersive_model([0.0, 5.0], 0.1, 7.0, d=2)


class TestDressed:
    def test_no_coupling_gives_bare(self):
        omega = np.array([0.0, 5.0, 9.5, 13.0])
        model = dispersive_model(omega, 0.0, 7.0, 3)
        assert dressed_transition(model, 0, 2) == pytest.approx(4.75)

    def test_shift_direction(self):
        omega = np.array([0.0, 5.0, 9.5])
        model = dispersive_model(omega, 0.2, 4.0, 2)
        x = model.chi_pair[0]
        assert dressed_transition(model, 0, 1) == pytest.approx(5.0 + x)

    def test_weak_coupling_device(self):
        model = reference_model(4, g=65 * MHZ)
        bare = reference_model(4, g=1e-9 * MHZ)
        shift = [(dressed_transition(model, j, j + 1) - dressed_transition(bare, j, j + 1)) / MHZ
                 for j in range(3)]
        # frozen from a dense-eigh, plain-loop evaluation at g/2pi = 65 MHz
        np.testing.assert_allclose(shift, [-2.1212013, -1.5056984, -1.0538742], atol=1e-6)

    def test_index_error(self):
        model = dispersive_model([0.0, 5.0, 9.0], 0.1, 7.0)
        with pytest.raises(IndexError):
            dressed_transition(model, 1, 1)


class TestTwoPhoton:
    def test_harmonic_ladder(self):
        assert two_photon_factor([0.0, 5.0, 10.0], 4.6, 0) == 0.0

    def test_direct_value(self):
        # sqrt(2) * (9 - 10) / ((9 - 5 - 4.6) * (5 - 0 - 4.6))
        assert two_photon_factor([0.0, 5.0, 9.0], 4.6, 0) == pytest.approx(np.sqrt(2) / 0.24)

    @pytest.mark.parametrize("omega_d", [4.0, 5.0, 4.0 * (1 + 5e-7)])
    def test_poles(self, omega_d):
        with pytest.raises(ResonanceError):
            two_photon_factor([0.0, 5.0, 9.0], omega_d, 0)

    def test_levels_required(self):
        with pytest.raises(IndexError):
            two_photon_factor([0.0, 5.0, 9.0], 4.5, 1)

    @settings(max_examples=50, deadline=None)
    @given(eps=st.floats(1e-6, 1e-2))
    def test_linear_in_curvature(self, eps):
        w = np.array([0.0, 5.0, 10.0 - eps])
        f = two_photon_factor(w, 4.5, 0)
        expected = np.sqrt(2) * (-eps) / ((5.0 - eps - 4.5) * 0.5)
        assert f == pytest.approx(expected, rel=1e-9)
        assert abs(f) < 12 * eps


class TestCalibration:
    def test_rabi_first(self):
        assert rabi_angle_first(1.0, np.pi, 0) == pytest.approx(np.pi)
        assert rabi_angle_first(2.0, 3.0, 1) == pytest.approx(np.sqrt(2) * 6.0)

    def test_rabi_second_scaling(self):
        base = rabi_angle_second(1.0, 0.3, 2.0)
        assert rabi_angle_second(1.0, 0.6, 2.0) == pytest.approx(4 * base)
        assert rabi_angle_second(1.0, -0.3, 2.0) == base

    def test_pi_amplitudes(self):
        first, second = pi_amplitudes(1.0, 10.0, 10.0, 0.5, 0)
        assert first == 1.0
        assert second == pytest.approx(2 * np.sqrt(2.0))
        assert pi_amplitudes(1.0, 10.0, 10.0, 0.5, 3)[0] == 0.5
        _, longer = pi_amplitudes(1.0, 10.0, 20.0, 0.5, 0)
        assert longer ** 2 == pytest.approx(second ** 2 / 2)

    def test_pi_amplitudes_are_consistent_with_rabi_angles(self):
        f, t = 0.7, 3.0
        first, second = pi_amplitudes(np.pi / t, t, t, f, 1)
        assert rabi_angle_first(t, first, 1) == pytest.approx(np.pi)
        assert rabi_angle_second(t, second, f) == pytest.approx(np.pi)

    @pytest.mark.parametrize("f_j", [-0.5, 0.0])
    def test_domain(self, f_j):
        with pytest.raises(DomainError):
            pi_amplitudes(1.0, 10.0, 10.0, f_j, 0)


@settings(max_examples=50, deadline=None)
@given(omega=levels, g=st.floats(0.001, 0.05), omega_r=st.floats(3.5, 6.0))
def test_telescoping(omega, g, omega_r):
    d = len(omega) - 1
    try:
        model = dispersive_model(omega, g, omega_r, d)
    except ResonanceError:
        return
    partial = np.cumsum(model.chi)
    np.testing.assert_allclose(partial, -model.chi_pair, rtol=0, atol=1e-12 * np.abs(model.chi_pair).max())


@settings(max_examples=50, deadline=None)
@given(omega=levels, g=st.floats(0.001, 0.05), omega_r=st.floats(3.5, 6.0))
def test_quadratic_in_coupling(omega, g, omega_r):
    try:
        one = dispersive_model(omega, g, omega_r)
    except ResonanceError:
        return
    two = dispersive_model(omega, 2 * g, omega_r)
    np.testing.assert_allclose(two.chi_pair, 4 * one.chi_pair, rtol=1e-12)
    np.testing.assert_allclose(two.chi, 4 * one.chi, rtol=1e-12, atol=1e-15)
