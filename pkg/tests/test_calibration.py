import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfimu.calibration import (
    CalibrationDataset,
    CalibrationParams,
    apply_calibration,
    build_V,
    known_acceleration,
    solve_calibration,
    synthetic_dataset,
)
from gfimu.errors import UnidentifiableError


def random_sensor(rng, max_cond=10.0):
    while True:
        s = np.eye(3) * rng.uniform(0.5, 2.0) + 0.1 * rng.normal(size=(3, 3))
        if np.linalg.cond(s) < max_cond:
            return s, rng.normal(size=3) * 0.5


class TestBuildV:
    def test_zero_reading(self):
        V = build_V([0, 0, 0])
        assert np.array_equal(V[:, :9], np.zeros((3, 9)))
        np.testing.assert_array_equal(V[:, 9:], np.eye(3))

    def test_identity_sensitivity(self):
        y = np.concatenate([np.eye(3).reshape(-1), np.zeros(3)])
        v = np.array([0.3, -1.2, 4.0])
        np.testing.assert_array_equal(build_V(v) @ y, v)

    def test_matches_affine_map(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            s, o, v = rng.normal(size=(3, 3)), rng.normal(size=3), rng.normal(size=3)
            y = np.concatenate([s.reshape(-1), o])
            np.testing.assert_allclose(build_V(v) @ y, s @ v + o, atol=1e-12)


def test_known_acceleration_convention():
    np.testing.assert_array_equal(known_acceleration("-x"), [9.81, 0, 0])
    np.testing.assert_array_equal(known_acceleration("+z"), [0, 0, -9.81])
    with pytest.raises(ValueError):
        known_acceleration("x")


class TestSolve:
    def test_identity_sensor(self):
        p = solve_calibration(synthetic_dataset(np.eye(3), np.zeros(3)))
        np.testing.assert_allclose(p.s, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(p.o, np.zeros(3), atol=1e-12)
        assert p.residual_rms < 1e-12

    def test_random_sensor_exact(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            s, o = random_sensor(rng)
            p = solve_calibration(synthetic_dataset(s, o))
            np.testing.assert_allclose(p.s, s, atol=1e-9)
            np.testing.assert_allclose(p.o, o, atol=1e-9)

    def test_three_positive_axes_unidentifiable(self):
        data = synthetic_dataset(np.eye(3), np.zeros(3), orientations=["+x", "+y", "+z"], samples_per_orientation=10)
        with pytest.raises(UnidentifiableError) as info:
            solve_calibration(data)
        assert info.value.rank == 9
        assert info.value.orientations == 3

    def test_four_orientations_enough(self):
        s, o = random_sensor(np.random.default_rng(2))
        p = solve_calibration(synthetic_dataset(s, o, orientations=["+x", "-x", "+y", "+z"]))
        np.testing.assert_allclose(p.s, s, atol=1e-9)

    def test_too_few_samples(self):
        with pytest.raises(UnidentifiableError):
            solve_calibration(CalibrationDataset(np.zeros((3, 3)), np.zeros((3, 3))))

    def test_least_squares_optimality(self):
        rng = np.random.default_rng(3)
        s, o = random_sensor(rng)
        data = synthetic_dataset(s, o, samples_per_orientation=20, noise_std=0.05, seed=4)
        p = solve_calibration(data)
        V = np.vstack([build_V(v) for v in data.raw])
        A = data.known.reshape(-1)
        y = np.concatenate([p.s.reshape(-1), p.o])
        base = np.sum((V @ y - A) ** 2)
        for _ in range(50):
            delta = rng.normal(size=12)
            delta *= 1e-3 / np.linalg.norm(delta)
            assert np.sum((V @ (y + delta) - A) ** 2) >= base


class TestApply:
    def test_zero_raw_gives_offset(self):
        p = CalibrationParams(np.diag([2.0, 3, 4]), np.array([0.1, 0.2, 0.3]))
        np.testing.assert_array_equal(apply_calibration(p, np.zeros(3)), p.o)

    def test_identity(self):
        v = np.array([1.0, -2.0, 3.5])
        np.testing.assert_array_equal(apply_calibration(CalibrationParams.identity(), v), v)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        s, o = random_sensor(rng)
        data = synthetic_dataset(s, o)
        p = solve_calibration(data)
        np.testing.assert_allclose(apply_calibration(p, data.raw), data.known, atol=1e-9)


def test_noisy_protocol_within_one_percent():
    rng = np.random.default_rng(5)
    s, o = random_sensor(rng)
    data = synthetic_dataset(s, o, samples_per_orientation=500, noise_std=0.02, seed=6)
    p = solve_calibration(data)
    # sensitivity error expressed as acceleration error at 1 g of raw signal
    raw_g = np.linalg.norm(np.linalg.solve(s, [9.81, 0, 0]))
    assert np.max(np.abs(p.s - s)) * raw_g < 0.01 * 9.81
