"""Synthetic accelerometer-array and marker data for rigid-body motion.

Angular velocity is prescribed directly in the body frame, so sensor truth
follows from ``a_i = a_O + alpha x r_i + w x (w x r_i)`` without integrating
attitude. ``a_O`` carries gravity and any linear motion of the body origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.transform import Rotation

from .geometry import SensorArrayGeometry, build_D
from .kinematics import y_vector

GRAVITY = 9.81

VecFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]


@dataclass(frozen=True)
class AccelFrame:
    t: float
    a_hat: NDArray[np.float64]


@dataclass(frozen=True)
class TrajectoryProfile:
    """Body-frame motion. Each callable maps times of shape (K,) to (K, 3)."""

    omega_fn: VecFn
    alpha_fn: VecFn
    a_origin_fn: VecFn
    name: str = "custom"

    def omega(self, t: ArrayLike) -> NDArray[np.float64]:
        return _eval(self.omega_fn, t)

    def alpha(self, t: ArrayLike) -> NDArray[np.float64]:
        return _eval(self.alpha_fn, t)

    def a_origin(self, t: ArrayLike) -> NDArray[np.float64]:
        return _eval(self.a_origin_fn, t)

    def with_origin(self, a_origin_fn: VecFn) -> "TrajectoryProfile":
        return TrajectoryProfile(self.omega_fn, self.alpha_fn, a_origin_fn, self.name)


def _eval(fn: VecFn, t: ArrayLike) -> NDArray[np.float64]:
    t = np.asarray(t, dtype=float)
    out = np.asarray(fn(np.atleast_1d(t)), dtype=float)
    return out[0] if t.ndim == 0 else out


@dataclass(frozen=True)
class SimulationConfig:
    geom: SensorArrayGeometry
    noise_std: float | Sequence[float] = 0.02
    sample_rate: float = 100.0
    duration: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if not self.duration >= 0:
            raise ValueError("duration must be non-negative")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    def times(self) -> NDArray[np.float64]:
        return np.arange(self.n_samples) / self.sample_rate


@dataclass
class SimulationRun:
    t: NDArray[np.float64]
    a_hat: NDArray[np.float64]  # (K, 3N)
    omega: NDArray[np.float64]  # (K, 3), rad/s
    alpha: NDArray[np.float64] = field(repr=False)

    @property
    def frames(self) -> list[AccelFrame]:
        return [AccelFrame(float(t), a) for t, a in zip(self.t, self.a_hat)]

    @property
    def truth(self) -> list[tuple[float, NDArray[np.float64]]]:
        return [(float(t), w) for t, w in zip(self.t, self.omega)]


def cube_placement(d: float) -> SensorArrayGeometry:
    """Four sensors on cube vertices giving ``S_d = d * antidiag(1, 1, 1)``."""
    if not d > 0:
        raise ValueError(f"edge length must be positive, got {d}")
    pos = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -d], [0.0, -d, -d], [-d, -d, -d]])
    return SensorArrayGeometry(pos, name=f"cube({d:g})")


def constant_gravity(g: float = GRAVITY) -> VecFn:
    return lambda t: np.tile([0.0, 0.0, g], (t.size, 1))


def sinusoidal_origin(
    amplitude: float, frequency: float = 0.3, g: float = GRAVITY
) -> VecFn:
    """Gravity on body z plus a three-axis sinusoidal linear acceleration (m/s^2)."""
    phases = np.array([0.0, 2.1, 4.2])
    scale = np.array([1.0, 0.7, 0.5])

    def fn(t):
        lin = amplitude * scale * np.sin(2 * np.pi * frequency * t[:, None] + phases)
        return lin + np.array([0.0, 0.0, g])

    return fn


def sinusoidal_trajectory(
    roll: tuple[float, float, float] = (10.0, 0.5, 25.0),
    yaw: tuple[float, float, float] = (20.0, 0.75, 40.0),
    a_origin_fn: VecFn | None = None,
) -> TrajectoryProfile:
    """Roll rate on body x and yaw rate on body z, each ``amp * sin(2 pi f t + phase)``.

    ``roll`` and ``yaw`` are ``(amplitude deg/s, frequency Hz, phase deg)``.
    Pitch rate is zero.
    """
    amps = np.radians([roll[0], 0.0, yaw[0]])
    freqs = np.array([roll[1], 0.0, yaw[1]])
    phases = np.radians([roll[2], 0.0, yaw[2]])
    w = 2 * np.pi * freqs

    def omega(t):
        return amps * np.sin(w * t[:, None] + phases)

    def alpha(t):
        return amps * w * np.cos(w * t[:, None] + phases)

    return TrajectoryProfile(omega, alpha, a_origin_fn or constant_gravity(), name="dynamic")


def static_trajectory(a_origin_fn: VecFn | None = None) -> TrajectoryProfile:
    zero = lambda t: np.zeros((t.size, 3))  # noqa: E731
    return TrajectoryProfile(zero, zero, a_origin_fn or constant_gravity(), name="static")


def constant_rate_trajectory(omega: ArrayLike, a_origin_fn: VecFn | None = None) -> TrajectoryProfile:
    w = np.asarray(omega, dtype=float).reshape(3)
    return TrajectoryProfile(
        lambda t: np.tile(w, (t.size, 1)),
        lambda t: np.zeros((t.size, 3)),
        a_origin_fn or constant_gravity(),
        name="constant",
    )


def true_accelerations(geom: SensorArrayGeometry, profile: TrajectoryProfile, t: ArrayLike) -> NDArray[np.float64]:
    """Stacked noiseless readings: shape (3N,) for scalar ``t``, (K, 3N) for arrays."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    omega, alpha, a_o = profile.omega(t), profile.alpha(t), profile.a_origin(t)
    y = np.hstack([omega**2, (omega[:, [1, 2, 0]] * omega[:, [2, 0, 1]]), alpha])
    d_stack = np.vstack([build_D(r) for r in geom.positions])
    a = y @ d_stack.T + np.tile(a_o, (1, geom.n))
    return a[0] if scalar else a


def _noise_scale(noise_std, n: int) -> NDArray[np.float64]:
    std = np.broadcast_to(np.asarray(noise_std, dtype=float), (n,))
    return np.repeat(std, 3)


def simulate(config: SimulationConfig, profile: TrajectoryProfile) -> SimulationRun:
    t = config.times()
    geom = config.geom
    if t.size == 0:
        empty = np.zeros((0, 3))
        return SimulationRun(t, np.zeros((0, 3 * geom.n)), empty, empty.copy())
    a = true_accelerations(geom, profile, t)
    rng = np.random.default_rng(config.seed)
    a_hat = a + rng.standard_normal(a.shape) * _noise_scale(config.noise_std, geom.n)
    return SimulationRun(t=t, a_hat=a_hat, omega=profile.omega(t), alpha=profile.alpha(t))


@dataclass(frozen=True)
class SweepRow:
    d: float
    stderr: NDArray[np.float64]  # deg/s per axis, averaged over seeds
    mean_error: NDArray[np.float64]
    n_seeds: int


def edge_sweep(
    d_values: Sequence[float],
    profile: TrajectoryProfile,
    config: SimulationConfig,
    seeds: Sequence[int] | None = None,
    variant: str = "uncorrelated",
) -> list[SweepRow]:
    """Standard error of the estimate for a cube array at each edge length.

    Every edge length reuses the same seeds so that rows differ only by ``d``.
    """
    from .ekf import make_filter, filter_arrays
    from .geometry import noise_covariance
    from .metrics import error_stats

    if any(not d > 0 for d in d_values):
        raise ValueError("edge lengths must be positive")
    seeds = [config.seed] if seeds is None else list(seeds)
    rows = []
    for d in d_values:
        geom = cube_placement(d)
        cfg = make_filter(geom, noise_covariance(config.noise_std, geom.n), variant=variant,
                          dt=1.0 / config.sample_rate)
        stds, means = [], []
        for seed in seeds:
            run = simulate(SimulationConfig(geom, config.noise_std, config.sample_rate, config.duration, seed), profile)
            xs, _ = filter_arrays(run.t, run.a_hat, cfg)
            mean, std = error_stats(np.degrees(xs), np.degrees(run.omega))
            stds.append(std)
            means.append(mean)
        rows.append(SweepRow(float(d), np.mean(stds, axis=0), np.mean(means, axis=0), len(seeds)))
    return rows


def cube_marker_set(d: float = 0.1) -> NDArray[np.float64]:
    """Five body-frame marker positions on a cube of edge ``d`` (asymmetric layout)."""
    return np.array(
        [
            [0.0, 0.0, 0.0],
            [d, 0.0, 0.0],
            [d, d, 0.0],
            [0.0, d, d],
            [0.5 * d, 0.0, d],
        ]
    )


def spin_markers(
    body_positions: ArrayLike,
    omega: ArrayLike,
    times: ArrayLike,
    initial: Rotation | None = None,
    translation_fn: VecFn | None = None,
    noise_std: float = 0.0,
    seed: int = 0,
) -> NDArray[np.float64]:
    """World-frame marker positions (K, M, 3) for a constant body-rate spin.

    The body-to-world rotation is ``R(t) = R0 exp([omega] t)``; the body origin
    follows ``translation_fn``. Isotropic Gaussian noise is added per coordinate.
    """
    body = np.asarray(body_positions, dtype=float)
    t = np.asarray(times, dtype=float).reshape(-1)
    w = np.asarray(omega, dtype=float).reshape(3)
    r0 = initial if initial is not None else Rotation.identity()
    rots = r0 * Rotation.from_rotvec(t[:, None] * w)
    world = np.einsum("kij,mj->kmi", rots.as_matrix(), body)
    if translation_fn is not None:
        world = world + translation_fn(t)[:, None, :]
    if noise_std > 0:
        world = world + np.random.default_rng(seed).normal(0.0, noise_std, world.shape)
    return world
