from dataclasses import replace

import numpy as np
import pytest

from gfimu.ekf import (
    EkfState,
    filter_arrays,
    make_filter,
    measurement_update,
    run_filter,
    time_update,
)
from gfimu.errors import InputError
from gfimu.geometry import noise_covariance
from gfimu.kinematics import f_jacobian
from gfimu.simulator import (
    AccelFrame,
    SimulationConfig,
    constant_rate_trajectory,
    cube_placement,
    simulate,
    sinusoidal_trajectory,
    true_accelerations,
)

Q = noise_covariance(0.02, 4)


@pytest.fixture(scope="module")
def unc():
    return make_filter(cube_placement(0.1), Q, "uncorrelated")


@pytest.fixture(scope="module")
def corr():
    return make_filter(cube_placement(0.1), Q, "correlated")


class TestMakeFilter:
    def test_correlated_m_is_d_alpha(self, corr):
        assert np.array_equal(corr.gains.m_mat, corr.gains.d_alpha)
        assert np.array_equal(corr.gains.l_mat, np.zeros((3, 6)))

    def test_uncorrelated_decoupled(self, unc):
        g = unc.gains
        assert np.max(np.abs(g.m_mat @ Q @ g.d_omega2.T)) < 1e-12

    def test_same_measurement_noise(self, unc, corr):
        np.testing.assert_array_equal(unc.noise.r_meas, corr.noise.r_meas)

    def test_defaults(self, unc):
        np.testing.assert_array_equal(unc.x0, np.zeros(3))
        np.testing.assert_array_equal(unc.p0, 0.25 * np.eye(3))

    def test_bad_variant(self):
        with pytest.raises(ValueError):
            make_filter(cube_placement(0.1), Q, "smoothing")


class TestTimeUpdate:
    def test_origin_correlated(self, corr):
        s = EkfState(np.zeros(3), 0.1 * np.eye(3))
        out = time_update(s, np.zeros(12), 0.01, corr)
        np.testing.assert_array_equal(out.x, np.zeros(3))
        np.testing.assert_allclose(out.p, s.p + 1e-4 * corr.noise.mqm, atol=1e-18)
        assert out.k_index == 1

    def test_deterministic_propagation(self, unc):
        cfg = replace(unc, noise=replace(unc.noise, mqm=np.zeros((3, 3))))
        out = time_update(EkfState(np.array([0.1, 0.2, -0.3]), np.zeros((3, 3))), np.ones(12), 0.01, cfg)
        np.testing.assert_array_equal(out.p, np.zeros((3, 3)))

    def test_adds_process_noise(self, unc):
        x = np.array([0.2, -0.1, 0.3])
        s = EkfState(x, 0.01 * np.eye(3))
        F = f_jacobian(x, 0.01, unc.gains)
        out = time_update(s, np.random.default_rng(0).normal(size=12), 0.01, unc)
        assert np.trace(out.p) > np.trace(F @ s.p @ F.T)

    def test_rejects_nonfinite(self, unc):
        a = np.zeros(12)
        a[3] = np.nan
        with pytest.raises(InputError):
            time_update(unc.initial_state(), a, 0.01, unc)


class TestMeasurementUpdate:
    def test_zero_jacobian_no_correction(self, unc):
        prior = EkfState(np.zeros(3), 0.3 * np.eye(3))
        out = measurement_update(prior, np.random.default_rng(1).normal(size=12), unc)
        np.testing.assert_array_equal(out.x, prior.x)
        np.testing.assert_array_equal(out.p, prior.p)

    def test_zero_innovation(self, unc):
        x = np.array([0.4, -0.2, 0.7])
        a = true_accelerations(cube_placement(0.1), constant_rate_trajectory(x), 0.0)
        out = measurement_update(EkfState(x, 0.2 * np.eye(3)), a, unc)
        np.testing.assert_allclose(out.x, x, atol=1e-12)

    def test_shrinks_covariance(self, unc):
        x = np.array([0.4, -0.2, 0.7])
        prior = EkfState(x, 0.2 * np.eye(3))
        out = measurement_update(prior, np.zeros(12), unc)
        assert np.trace(out.p) < np.trace(prior.p)
        np.testing.assert_array_equal(out.p, out.p.T)


class TestRunFilter:
    def test_empty(self, unc):
        assert run_filter([], unc) == []

    def test_matches_stepwise(self, unc):
        run = simulate(SimulationConfig(cube_placement(0.1), duration=1.0, seed=3), sinusoidal_trajectory())
        states = run_filter(run.frames, unc)
        steps = np.diff(run.t)
        steps = np.concatenate([[steps[0]], steps])
        s = unc.initial_state()
        for k, f in enumerate(run.frames):
            s = measurement_update(time_update(s, f.a_hat, steps[k], unc), f.a_hat, unc)
            np.testing.assert_allclose(states[k].x, s.x, rtol=1e-9, atol=1e-12)
            np.testing.assert_allclose(states[k].p, s.p, rtol=1e-9, atol=1e-12)
        assert states[-1].t == pytest.approx(0.99)

    def test_non_monotonic(self, unc):
        frames = [AccelFrame(0.0, np.zeros(12)), AccelFrame(0.02, np.zeros(12)), AccelFrame(0.01, np.zeros(12))]
        with pytest.raises(InputError):
            run_filter(frames, unc)

    def test_single_frame_needs_dt(self, unc):
        with pytest.raises(InputError):
            run_filter([AccelFrame(0.0, np.zeros(12))], unc)
        cfg = replace(unc, dt=0.01)
        assert len(run_filter([AccelFrame(0.0, np.zeros(12))], cfg)) == 1

    def test_covariance_stays_psd(self, unc):
        rng = np.random.default_rng(9)
        t = np.arange(10_000) * 0.01
        a = rng.uniform(-20, 20, size=(10_000, 12))
        _, Ps = filter_arrays(t, a, unc)
        eig = np.linalg.eigvalsh(Ps)
        assert eig.min() >= -1e-8
        np.testing.assert_array_equal(Ps, np.transpose(Ps, (0, 2, 1)))

    @staticmethod
    def _mirrored_runs(cfg_filter):
        prof = sinusoidal_trajectory()
        neg = type(prof)(lambda t: -prof.omega_fn(t), lambda t: -prof.alpha_fn(t), prof.a_origin_fn)
        cfg = SimulationConfig(cube_placement(0.1), noise_std=0.0, duration=5.0)
        pos_run, neg_run = simulate(cfg, prof), simulate(cfg, neg)
        x0 = prof.omega(0.0)
        xs_p, _ = filter_arrays(pos_run.t, pos_run.a_hat, replace(cfg_filter, x0=x0, dt=0.01))
        xs_n, _ = filter_arrays(neg_run.t, neg_run.a_hat, replace(cfg_filter, x0=-x0, dt=0.01))
        return xs_p, xs_n

    def test_sign_symmetry_correlated(self, corr):
        xs_p, xs_n = self._mirrored_runs(corr)
        np.testing.assert_allclose(xs_n, -xs_p, atol=1e-9)

    def test_sign_symmetry_uncorrelated_approximate(self, unc):
        # L (h(w) - h(x)) is even under the mirror, so symmetry holds only up to tracking error
        xs_p, xs_n = self._mirrored_runs(unc)
        assert np.max(np.abs(xs_n + xs_p)) < np.radians(0.1)

    def test_tracks_dynamic_truth(self, unc):
        run = simulate(SimulationConfig(cube_placement(0.1), duration=20.0, seed=5), sinusoidal_trajectory())
        xs, _ = filter_arrays(run.t, run.a_hat, unc)
        err = np.degrees(xs - run.omega)[200:]
        assert np.all(err.std(axis=0) < 3.0)
