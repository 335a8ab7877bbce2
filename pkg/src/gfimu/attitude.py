"""Marker-based attitude (QUEST) and angular velocity by quaternion differencing.

Quaternions use the Hamilton convention with the scalar part first. The
attitude returned by :func:`quest` rotates body-frame vectors into the world
frame, so body angular velocity is the vector part of ``2 q* (x) dq/dt``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import AmbiguousAttitudeError

DEFAULT_MARKER_SIGMA = 0.002  # m
NEWTON_MAX_ITER = 50


@dataclass(frozen=True)
class Quaternion:
    w: float
    v: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(3))

    @classmethod
    def from_array(cls, q: ArrayLike) -> "Quaternion":
        q = np.asarray(q, dtype=float).reshape(4)
        return cls(q[0], q[1:])

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(1.0, np.zeros(3))

    @classmethod
    def from_axis_angle(cls, axis: ArrayLike, angle: float) -> "Quaternion":
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        return cls(np.cos(angle / 2), np.sin(angle / 2) * axis)

    def as_array(self) -> NDArray[np.float64]:
        return np.concatenate([[self.w], self.v])

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def normalized(self) -> "Quaternion":
        return Quaternion.from_array(self.as_array() / self.norm())

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.v)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return quaternion_multiply(self, other)

    def rotation_matrix(self) -> NDArray[np.float64]:
        q = self.normalized()
        w, (x, y, z) = q.w, q.v
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )


def quaternion_multiply(a: Quaternion, b: Quaternion) -> Quaternion:
    return Quaternion(a.w * b.w - a.v @ b.v, a.w * b.v + b.w * a.v + np.cross(a.v, b.v))


def quaternion_conjugate(a: Quaternion) -> Quaternion:
    return Quaternion(a.w, -a.v)


@dataclass(frozen=True)
class MarkerSet:
    body_positions: NDArray[np.float64]
    weights: NDArray[np.float64]

    def __post_init__(self):
        body = np.asarray(self.body_positions, dtype=float)
        w = np.broadcast_to(np.asarray(self.weights, dtype=float), (body.shape[0],)).copy()
        if body.ndim != 2 or body.shape[1] != 3 or body.shape[0] < 3:
            raise ValueError("need at least three body-frame marker positions of shape (M, 3)")
        if np.any(w <= 0):
            raise ValueError("marker weights must be positive")
        object.__setattr__(self, "body_positions", body)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, body_positions: ArrayLike, sigma: float = DEFAULT_MARKER_SIGMA) -> "MarkerSet":
        body = np.asarray(body_positions, dtype=float)
        return cls(body, np.full(body.shape[0], 1.0 / sigma**2))

    @classmethod
    def from_sigmas(cls, body_positions: ArrayLike, sigmas: ArrayLike) -> "MarkerSet":
        return cls(np.asarray(body_positions, dtype=float), 1.0 / np.asarray(sigmas, dtype=float) ** 2)


@dataclass(frozen=True)
class AttitudeSolution:
    q: Quaternion
    p_theta: NDArray[np.float64]
    lambda_max: float
    newton_converged: bool = True


def _directions(points: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    centered = points - points.mean(axis=0)
    norms = np.linalg.norm(centered, axis=1)
    ok = norms > 1e-9 * max(norms.max(), 1e-300)
    unit = np.zeros_like(centered)
    unit[ok] = centered[ok] / norms[ok, None]
    return unit, ok


def davenport_matrix(b: NDArray[np.float64]) -> NDArray[np.float64]:
    """4x4 K with scalar-first ordering: ``[[sigma, Z^T], [Z, S - sigma I]]``."""
    s = b + b.T
    sigma = np.trace(b)
    z = np.array([b[1, 2] - b[2, 1], b[2, 0] - b[0, 2], b[0, 1] - b[1, 0]])
    k = np.empty((4, 4))
    k[0, 0] = sigma
    k[0, 1:] = z
    k[1:, 0] = z
    k[1:, 1:] = s - sigma * np.eye(3)
    return k


def attitude_profile(body_dirs: ArrayLike, world_dirs: ArrayLike, weights: ArrayLike) -> NDArray[np.float64]:
    return np.einsum("i,ij,ik->jk", np.asarray(weights), np.asarray(body_dirs), np.asarray(world_dirs))


def _newton_lambda(a: float, b: float, c: float, d: float, sigma: float, lam0: float):
    lam = lam0
    for _ in range(NEWTON_MAX_ITER):
        lam2 = lam * lam
        f = lam2 * lam2 - (a + b) * lam2 - c * lam + (a * b + c * sigma - d)
        fp = 4 * lam2 * lam - 2 * (a + b) * lam - c
        if fp == 0.0:
            return lam, False
        step = f / fp
        lam -= step
        if abs(step) <= 1e-15 * max(abs(lam), 1.0):
            return lam, True
    return lam, False


def quest(markers: MarkerSet, world_positions: ArrayLike) -> AttitudeSolution:
    """Optimal body-to-world attitude from matched marker positions.

    Both marker clouds are mean-centered and reduced to unit direction
    vectors. The largest eigenvalue of the Davenport matrix is found by
    Newton iteration on its characteristic quartic, starting from the sum of
    weights; if that fails the eigen-decomposition is used instead.

    Raises
    ------
    AmbiguousAttitudeError
        If the markers are collinear (or coincident).
    """
    world = np.asarray(world_positions, dtype=float)
    body = markers.body_positions
    if world.shape != body.shape:
        raise ValueError(f"world positions {world.shape} do not match body markers {body.shape}")
    if not np.all(np.isfinite(world)):
        raise ValueError("world marker positions must be finite")
    b_dirs, ok_b = _directions(body)
    w_dirs, ok_w = _directions(world)
    ok = ok_b & ok_w
    w = markers.weights[ok]
    b_dirs, w_dirs = b_dirs[ok], w_dirs[ok]
    if ok.sum() < 2 or np.linalg.matrix_rank(b_dirs, tol=1e-9) < 2:
        raise AmbiguousAttitudeError("marker geometry is collinear; attitude is not unique")

    B = attitude_profile(b_dirs, w_dirs, w)
    S = B + B.T
    sigma = float(np.trace(B))
    Z = np.array([B[1, 2] - B[2, 1], B[2, 0] - B[0, 2], B[0, 1] - B[1, 0]])
    kappa = float(np.trace(_adjugate(S)))
    delta = float(np.linalg.det(S))
    a = sigma**2 - kappa
    b = sigma**2 + Z @ Z
    c = delta + Z @ S @ Z
    d = Z @ S @ S @ Z
    lam, converged = _newton_lambda(a, b, c, d, sigma, float(w.sum()))

    if converged:
        alpha = lam**2 - sigma**2 + kappa
        beta = lam - sigma
        gamma = (lam + sigma) * alpha - delta
        x = (alpha * np.eye(3) + beta * S + S @ S) @ Z
        q_arr = np.concatenate([[gamma], x])
        scale = max(lam, 1e-300) ** 3
    if not converged or np.linalg.norm(q_arr) < 1e-4 * scale:
        # near-180 degree rotations make (gamma, x) vanish; use the eigenvector
        vals, vecs = np.linalg.eigh(davenport_matrix(B))
        if not converged:
            lam = float(vals[-1])
        q_arr = vecs[:, -1]
    q = Quaternion.from_array(q_arr / np.linalg.norm(q_arr))
    if q.w < 0:
        q = -q

    info = np.einsum("i,ijk->jk", w, np.eye(3)[None] - np.einsum("ij,ik->ijk", b_dirs, b_dirs))
    try:
        p_theta = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise AmbiguousAttitudeError("attitude covariance is singular") from exc
    return AttitudeSolution(q=q, p_theta=0.5 * (p_theta + p_theta.T), lambda_max=float(lam),
                            newton_converged=converged)


def _adjugate(m: NDArray[np.float64]) -> NDArray[np.float64]:
    adj = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(m, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


def wahba_cost(rotation: ArrayLike, markers: MarkerSet, world_positions: ArrayLike) -> float:
    """``0.5 * sum w_i |b_i - R^T s_i|^2`` on centered unit directions, ``R`` body-to-world."""
    b_dirs, _ = _directions(markers.body_positions)
    w_dirs, _ = _directions(np.asarray(world_positions, dtype=float))
    resid = b_dirs - w_dirs @ np.asarray(rotation)
    return 0.5 * float(np.sum(markers.weights * np.sum(resid**2, axis=1)))


def angular_velocity_from_quaternions(
    q_t: Quaternion,
    q_prev: Quaternion,
    T: float,
    p_t: ArrayLike | None = None,
    p_prev: ArrayLike | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.float64] | None]:
    """Body rate (rad/s) from two consecutive attitudes ``T`` seconds apart.

    ``q_prev`` is sign-aligned with ``q_t`` first. The covariance is
    ``(p_t + p_prev) / T^2`` when both are given.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    qa, qb = q_t.as_array(), q_prev.as_array()
    if qa @ qb < 0:
        qb = -qb
    dq = Quaternion.from_array((qa - qb) / T)
    omega = 2.0 * quaternion_multiply(quaternion_conjugate(q_t), dq).v
    p_omega = None
    if p_t is not None and p_prev is not None:
        p_omega = (np.asarray(p_t, dtype=float) + np.asarray(p_prev, dtype=float)) / T**2
    return omega, p_omega


def ground_truth_series(
    markers: MarkerSet, frames: Iterable[tuple[float, ArrayLike]]
) -> list[tuple[float, NDArray[np.float64], NDArray[np.float64]]]:
    """``(t, omega, P_omega)`` for every frame after the first."""
    out = []
    prev = None
    for t, world in frames:
        sol = quest(markers, world)
        q = sol.q
        if prev is not None:
            t_prev, q_prev, p_prev = prev
            if q.as_array() @ q_prev.as_array() < 0:
                q = -q
            omega, p_omega = angular_velocity_from_quaternions(q, q_prev, t - t_prev, sol.p_theta, p_prev)
            out.append((float(t), omega, p_omega))
        prev = (float(t), q, sol.p_theta)
    return out


def quaternion_sequence(markers: MarkerSet, worlds: Sequence[ArrayLike]) -> NDArray[np.float64]:
    """Sign-continuous (K, 4) attitude series."""
    qs = np.array([quest(markers, w).q.as_array() for w in worlds])
    for k in range(1, len(qs)):
        if qs[k] @ qs[k - 1] < 0:
            qs[k] = -qs[k]
    return qs
