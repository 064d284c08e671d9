import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_readout.errors import DegenerateError, ShortIntegrationWarning, StepError
from qudit_readout.presets import reference_model, reference_readout
from qudit_readout.readout import (ReadoutConfig, circle_center, integrate_mean_field,
                                   optimal_frequencies, pair_distance, sinc,
                                   steady_amp_drive_frame, steady_amp_general_frame)
from qudit_readout.units import MHZ


def transient_average(cfg, chi, omega_d, omega_m):
    """Closed-form kernel average of A(t) = A_ss (1 - exp(-gamma t)), A(0) = 0."""
    gamma = 1j * (cfg.omega_r + chi - omega_d) + 0.5 * cfg.kappa
    a_ss = -0.5j * cfg.omega * np.exp(1j * cfg.phi) / gamma
    beat = 1j * (omega_m - omega_d)
    T = cfg.T

    def mean_exp(rate):
        return 1.0 if rate == 0 else (np.exp(rate * T) - 1.0) / (rate * T)

    return a_ss * (mean_exp(beat) - mean_exp(beat - gamma))


unit_cfg = st.builds(
    ReadoutConfig,
    omega_r=st.floats(-5, 5), kappa=st.floats(0.01, 10), omega=st.floats(0, 100),
    T=st.just(1.0), phi=st.floats(-np.pi, np.pi))


class TestConfig:
    @pytest.mark.parametrize("kwargs", [dict(kappa=0.0), dict(omega=-1.0), dict(T=0.0)])
    def test_invalid(self, kwargs):
        base = dict(omega_r=1.0, kappa=1.0, omega=1.0)
        with pytest.raises(ValueError):
            ReadoutConfig(**{**base, **kwargs})

    def test_with_drive(self):
        cfg = ReadoutConfig(1.0, 1.0, 1.0).with_drive(omega_d=2.0)
        assert cfg.omega_d == 2.0 and cfg.omega_m is None
        with pytest.raises(ValueError):
            steady_amp_drive_frame(ReadoutConfig(1.0, 1.0, 1.0), 0.0)


class TestDriveFrame:
    def test_resonance(self):
        cfg = ReadoutConfig(omega_r=0.0, kappa=5 * MHZ, omega=100 * MHZ)
        a = steady_amp_drive_frame(cfg, 0.3 * MHZ, 0.3 * MHZ)
        assert a == pytest.approx(-20j, abs=1e-12)
        assert a == pytest.approx(2 * circle_center(cfg))

    def test_far_detuning(self):
        cfg = ReadoutConfig(omega_r=0.0, kappa=1.0, omega=1.0)
        assert abs(steady_amp_drive_frame(cfg, 0.0, 1e9)) < 1e-9

    def test_broadcasting(self):
        cfg = reference_readout()
        chi = reference_model().chi
        grid = cfg.omega_r + np.linspace(-10, 10, 7) * MHZ
        amps = steady_amp_drive_frame(cfg, chi, grid[:, None])
        assert amps.shape == (7, 4)
        assert amps[3, 2] == steady_amp_drive_frame(cfg, chi[2], grid[3])

    @settings(max_examples=200, deadline=None)
    @given(cfg=unit_cfg, chi=st.floats(-5, 5), omega_d=st.floats(-20, 20))
    def test_circle_law(self, cfg, chi, omega_d):
        a = steady_amp_drive_frame(cfg, chi, omega_d)
        radius = cfg.omega / (2 * cfg.kappa)
        assert abs(a - circle_center(cfg)) == pytest.approx(radius, rel=1e-12, abs=1e-12)


class TestGeneralFrame:
    cfg = reference_readout()

    def test_same_frame(self):
        chi = reference_model().chi
        w = self.cfg.omega_r + 2 * MHZ
        np.testing.assert_array_equal(steady_amp_general_frame(self.cfg, chi, w, w),
                                      steady_amp_drive_frame(self.cfg, chi, w))

    def test_sinc_zero(self):
        w_m = self.cfg.omega_r
        w_d = w_m + 2 * np.pi / self.cfg.T
        scale = abs(steady_amp_drive_frame(self.cfg, 1 * MHZ, w_d))
        # the residual is roundoff in (w_d - w_m) at GHz-scale absolute frequencies
        assert abs(steady_amp_general_frame(self.cfg, 1 * MHZ, w_d, w_m)) < 1e-10 * scale

    def test_sinc_series_branch(self):
        x = np.array([0.0, 5e-5, -9e-5, 2e-4, 1.0])
        np.testing.assert_allclose(sinc(x), [1.0, *(np.sin(x[1:]) / x[1:])], rtol=1e-15)

    def test_trajectory_shrinks_off_modulation(self):
        chi = reference_model().chi
        w_m = self.cfg.omega_r + 0.5 * (chi[0] + chi[1])
        grid = self.cfg.omega_r + np.linspace(-5, 15, 81) * MHZ
        a_m = steady_amp_general_frame(self.cfg, chi, grid[:, None], w_m)
        a_d = steady_amp_drive_frame(self.cfg, chi, grid[:, None])
        assert np.all(np.abs(a_m) <= np.abs(a_d) + 1e-12)
        at_m = steady_amp_general_frame(self.cfg, chi, w_m, w_m)
        np.testing.assert_allclose(at_m, steady_amp_drive_frame(self.cfg, chi, w_m))

    def test_short_integration_warning(self):
        short = ReadoutConfig(0.0, kappa=1.0, omega=1.0, T=2.0)
        with pytest.warns(ShortIntegrationWarning):
            steady_amp_general_frame(short, 0.0, 0.1, 0.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            steady_amp_general_frame(ReadoutConfig(0.0, 1.0, 1.0, T=6.0), 0.0, 0.1, 0.0)


class TestDistances:
    def test_split_optimum(self):
        cfg = ReadoutConfig(omega_r=0.0, kappa=1.0, omega=3.0)
        opt = optimal_frequencies(cfg, 2.0, -1.0)
        assert len(opt.frequencies) == 2
        assert opt.distance == cfg.diameter
        for w in opt.frequencies:
            assert pair_distance(cfg, 2.0, -1.0, w) == pytest.approx(cfg.diameter, rel=1e-12)

    def test_single_optimum(self):
        cfg = ReadoutConfig(omega_r=0.0, kappa=2.0, omega=3.0)
        opt = optimal_frequencies(cfg, -1.0, 1.0)
        assert opt.frequencies == (0.0,)
        assert opt.distance == pytest.approx(2 * 3.0 * 2.0 / (4.0 + 4.0))

    def test_two_kappa_separation(self):
        cfg = ReadoutConfig(omega_r=0.0, kappa=1.0, omega=1.0)
        assert pair_distance(cfg, 1.0, -1.0, 0.0) == pytest.approx(0.8 * cfg.diameter)

    def test_degenerate(self):
        with pytest.raises(DegenerateError):
            optimal_frequencies(ReadoutConfig(0.0, 1.0, 1.0), 0.5, 0.5)

    @settings(max_examples=50, deadline=None)
    @given(kappa=st.floats(0.1, 5), chi_i=st.floats(-5, 5), chi_j=st.floats(-5, 5))
    def test_optimum_matches_scan(self, kappa, chi_i, chi_j):
        if abs(chi_i - chi_j) < 1e-3:
            return
        cfg = ReadoutConfig(omega_r=0.0, kappa=kappa, omega=1.0)
        lo, hi = min(chi_i, chi_j) - 3 * kappa, max(chi_i, chi_j) + 3 * kappa
        grid = np.linspace(lo, hi, 20001)
        scan = pair_distance(cfg, chi_i, chi_j, grid)
        assert np.allclose(scan, pair_distance(cfg, chi_j, chi_i, grid), rtol=1e-14)
        opt = optimal_frequencies(cfg, chi_i, chi_j)
        assert scan.max() <= opt.distance * (1 + 1e-12)
        assert scan.max() == pytest.approx(opt.distance, rel=1e-4)


class TestMeanField:
    cfg = reference_readout()
    chi = reference_model().chi

    def test_no_drive(self):
        cfg = ReadoutConfig(self.cfg.omega_r, self.cfg.kappa, 0.0, self.cfg.T)
        assert integrate_mean_field(cfg, self.chi[0], 2000, omega_d=cfg.omega_r) == 0

    @pytest.mark.parametrize("detune_mhz,beat_mhz", [(0.0, 0.0), (3.0, 0.0), (-4.0, 2.5)])
    def test_matches_transient_solution(self, detune_mhz, beat_mhz):
        w_d = self.cfg.omega_r + self.chi[1] + detune_mhz * MHZ
        w_m = w_d + beat_mhz * MHZ
        got = integrate_mean_field(self.cfg, self.chi[1], 4000, omega_d=w_d, omega_m=w_m)
        want = transient_average(self.cfg, self.chi[1], w_d, w_m)
        assert abs(got - want) < 1e-9 * abs(want)

    def test_vectorized_states(self):
        w_d = self.cfg.omega_r + 2 * MHZ
        got = integrate_mean_field(self.cfg, self.chi, 2000, omega_d=w_d)
        want = [transient_average(self.cfg, c, w_d, w_d) for c in self.chi]
        np.testing.assert_allclose(got, want, rtol=1e-8)

    def test_approaches_steady_state(self):
        w_d = self.cfg.omega_r + self.chi[0] + 1 * MHZ
        errors = []
        for kappa_t in (10.0, 20.0, 40.0):
            cfg = ReadoutConfig(self.cfg.omega_r, self.cfg.kappa, self.cfg.omega, kappa_t / self.cfg.kappa)
            got = integrate_mean_field(cfg, self.chi[0], 4000, omega_d=w_d)
            ss = steady_amp_drive_frame(cfg, self.chi[0], w_d)
            errors.append(abs(got - ss) / abs(ss))
        assert errors[0] > errors[1] > errors[2]
        # the transient decays as 1 / (kappa T)
        assert errors[2] * 40 == pytest.approx(errors[1] * 20, rel=0.05)

    def test_step_guards(self):
        with pytest.raises(StepError):
            integrate_mean_field(self.cfg, 0.0, 999, omega_d=self.cfg.omega_r)
        far = self.cfg.omega_r + 2e4 * MHZ
        with pytest.raises(StepError):
            integrate_mean_field(self.cfg, 0.0, 1000, omega_d=far)
