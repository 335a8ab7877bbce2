"""Extended Kalman filter for angular velocity from an accelerometer array.

The same stacked reading ``a_hat`` drives both halves of each step: it is
integrated through ``M`` in the time update and projected through ``D_w2`` to
form the measurement ``z``. With the ``uncorrelated`` variant the two noise
terms are decorrelated by ``L``; the ``correlated`` variant sets ``L = 0`` and
``M = D_alpha`` for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConditioningError, InputError
from .geometry import NoiseGainSet, SensorArrayGeometry, noise_gain_matrices
from .kinematics import f_discrete, f_jacobian, h, h_jacobian

Variant = Literal["uncorrelated", "correlated"]
VARIANTS = ("uncorrelated", "correlated")

DEFAULT_P0_STD = 0.5  # rad/s


@dataclass(frozen=True)
class EkfState:
    x: NDArray[np.float64]
    p: NDArray[np.float64]
    k_index: int = 0
    t: float | None = None


@dataclass(frozen=True)
class NoiseModel:
    q: NDArray[np.float64]
    r_meas: NDArray[np.float64]
    mqm: NDArray[np.float64]  # M Q M^T; the time update scales it by T^2

    def q_proc(self, T: float) -> NDArray[np.float64]:
        return T * T * self.mqm


@dataclass(frozen=True)
class FilterConfig:
    variant: str
    gains: NoiseGainSet
    noise: NoiseModel
    x0: NDArray[np.float64]
    p0: NDArray[np.float64]
    dt: float | None = None

    def initial_state(self) -> EkfState:
        return EkfState(x=self.x0.copy(), p=self.p0.copy(), k_index=0)


def make_filter(
    geom: SensorArrayGeometry,
    q: ArrayLike,
    variant: Variant = "uncorrelated",
    x0: ArrayLike | None = None,
    p0: ArrayLike | None = None,
    dt: float | None = None,
) -> FilterConfig:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    q = np.asarray(q, dtype=float)
    gains = noise_gain_matrices(geom, q)
    if variant == "correlated":
        gains = replace(gains, l_mat=np.zeros((3, 6)), m_mat=gains.d_alpha.copy())
    r_meas = gains.d_omega2 @ q @ gains.d_omega2.T
    mqm = gains.m_mat @ q @ gains.m_mat.T
    noise = NoiseModel(q=q, r_meas=0.5 * (r_meas + r_meas.T), mqm=0.5 * (mqm + mqm.T))
    x0 = np.zeros(3) if x0 is None else np.asarray(x0, dtype=float).reshape(3)
    p0 = DEFAULT_P0_STD**2 * np.eye(3) if p0 is None else np.asarray(p0, dtype=float).reshape(3, 3)
    if dt is not None and dt <= 0:
        raise ValueError("dt must be positive")
    return FilterConfig(variant=variant, gains=gains, noise=noise, x0=x0, p0=p0, dt=dt)


def _check_reading(a_hat: ArrayLike, cfg: FilterConfig) -> NDArray[np.float64]:
    a = np.asarray(a_hat, dtype=float)
    if a.shape != (cfg.gains.m_mat.shape[1],):
        raise InputError(f"reading has shape {a.shape}, expected ({cfg.gains.m_mat.shape[1]},)")
    if not np.all(np.isfinite(a)):
        raise InputError("non-finite accelerometer reading")
    return a


def time_update(state: EkfState, a_hat: ArrayLike, T: float, cfg: FilterConfig) -> EkfState:
    a = _check_reading(a_hat, cfg)
    if not T > 0:
        raise InputError(f"sample time must be positive, got {T}")
    F = f_jacobian(state.x, T, cfg.gains)
    x = f_discrete(state.x, a, T, cfg.gains)
    p = F @ state.p @ F.T + cfg.noise.q_proc(T)
    return EkfState(x=x, p=0.5 * (p + p.T), k_index=state.k_index + 1, t=state.t)


def measurement_update(state: EkfState, a_hat: ArrayLike, cfg: FilterConfig) -> EkfState:
    """Correct a prior with ``z = D_w2 a_hat``.

    The gain uses the prior covariance: ``K = P- H^T (H P- H^T + R)^-1``.
    """
    a = _check_reading(a_hat, cfg)
    z = cfg.gains.d_omega2 @ a
    H = h_jacobian(state.x)
    PHt = state.p @ H.T
    S = H @ PHt + cfg.noise.r_meas
    try:
        K = np.linalg.solve(S, PHt.T).T
    except np.linalg.LinAlgError as exc:
        raise ConditioningError("innovation covariance is singular") from exc
    if not np.all(np.isfinite(K)):
        raise ConditioningError("innovation covariance is singular")
    x = state.x + K @ (z - h(state.x))
    p = (np.eye(3) - K @ H) @ state.p
    return EkfState(x=x, p=0.5 * (p + p.T), k_index=state.k_index, t=state.t)


def _sample_times(t: NDArray[np.float64], dt: float | None) -> NDArray[np.float64]:
    if t.size == 0:
        return t
    steps = np.diff(t)
    if np.any(~np.isfinite(t)) or np.any(steps <= 0):
        raise InputError("frame timestamps must be finite and strictly increasing")
    if dt is not None:
        first = dt
    elif steps.size:
        first = float(steps[0])
    else:
        raise InputError("a single frame needs an explicit dt")
    return np.concatenate([[first], steps])


def filter_arrays(
    t: ArrayLike, a_hat: ArrayLike, cfg: FilterConfig, state: EkfState | None = None
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Run the recursion over arrays; returns estimates (K, 3) and covariances (K, 3, 3).

    Same arithmetic as chaining ``time_update`` and ``measurement_update``,
    without per-step object allocation.
    """
    t = np.asarray(t, dtype=float).reshape(-1)
    a_hat = np.asarray(a_hat, dtype=float)
    n_in = cfg.gains.m_mat.shape[1]
    if a_hat.size == 0 and t.size == 0:
        return np.zeros((0, 3)), np.zeros((0, 3, 3))
    if a_hat.shape != (t.size, n_in):
        raise InputError(f"readings have shape {a_hat.shape}, expected ({t.size}, {n_in})")
    if not np.all(np.isfinite(a_hat)):
        raise InputError("non-finite accelerometer reading")
    Ts = _sample_times(t, cfg.dt)

    state = state or cfg.initial_state()
    x, P = state.x.astype(float).copy(), state.p.astype(float).copy()
    L, M, Dw = cfg.gains.l_mat, cfg.gains.m_mat, cfg.gains.d_omega2
    R, mqm = cfg.noise.r_meas, cfg.noise.mqm
    proc = a_hat @ M.T  # M a_hat for every frame
    meas = a_hat @ Dw.T  # z for every frame
    eye = np.eye(3)
    xs = np.empty((t.size, 3))
    Ps = np.empty((t.size, 3, 3))
    for k in range(t.size):
        T = Ts[k]
        F = eye - T * (L @ h_jacobian(x))
        x = x + T * (proc[k] - L @ h(x))
        P = F @ P @ F.T + (T * T) * mqm
        H = h_jacobian(x)
        PHt = P @ H.T
        S = H @ PHt + R
        try:
            K = np.linalg.solve(S, PHt.T).T
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(f"innovation covariance is singular at frame {k}") from exc
        x = x + K @ (meas[k] - h(x))
        P = (eye - K @ H) @ P
        P = 0.5 * (P + P.T)
        xs[k] = x
        Ps[k] = P
    return xs, Ps


def run_filter(frames: Sequence, cfg: FilterConfig) -> list[EkfState]:
    """One posterior state per frame; ``frames`` are objects with ``t`` and ``a_hat``."""
    if len(frames) == 0:
        return []
    t = np.array([f.t for f in frames], dtype=float)
    a = np.vstack([np.asarray(f.a_hat, dtype=float) for f in frames])
    xs, Ps = filter_arrays(t, a, cfg)
    return [EkfState(x=xs[k], p=Ps[k], k_index=k + 1, t=float(t[k])) for k in range(t.size)]
