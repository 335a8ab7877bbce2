"""Placement-derived matrices for a rigid array of triaxial accelerometers.

The rigid-body acceleration at a point ``r`` is ``a_O + alpha x r + w x (w x r)``,
which is linear in the 9-vector

    y = [w1^2, w2^2, w3^2, w2*w3, w3*w1, w1*w2, a1, a2, a3]

through the 3x9 matrix ``build_D(r)``. Differencing consecutive sensors removes
``a_O`` and leaves ``E a = G y``; the array can resolve ``y`` only when the
consecutive displacement vectors span R^3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConditioningError, GeometryDegenerateError

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class SensorArrayGeometry:
    """Positions of N accelerometers in the body frame, in meters.

    Estimation needs a non-coplanar placement (so N >= 4); construction only
    requires two sensors so that degenerate layouts can still be analysed.
    """

    positions: NDArray[np.float64]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must have shape (N, 3), got {pos.shape}")
        if pos.shape[0] < 2:
            raise ValueError("need at least two sensors")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class GeometryAnalysis:
    s_d: NDArray[np.float64]
    singular_values: NDArray[np.float64]
    condition_number: float
    sv_product: float
    rank: int
    noncoplanar: bool

    def to_dict(self) -> dict:
        return {
            "singular_values": self.singular_values.tolist(),
            "condition_number": self.condition_number if np.isfinite(self.condition_number) else "inf",
            "sv_product": self.sv_product,
            "rank": self.rank,
            "noncoplanar": self.noncoplanar,
            "s_d": self.s_d.tolist(),
        }


@dataclass(frozen=True)
class NoiseGainSet:
    """Row blocks of ``pinv(G) @ E`` plus the decorrelating matrices.

    ``d_omega2`` maps stacked readings to the six quadratic rate terms,
    ``d_alpha`` to angular acceleration. ``l_mat`` is chosen so that the
    process noise ``m_mat @ e`` is uncorrelated with the measurement noise
    ``d_omega2 @ e``.
    """

    d_omega2: NDArray[np.float64]
    d_alpha: NDArray[np.float64]
    l_mat: NDArray[np.float64]
    m_mat: NDArray[np.float64]


def build_D(r: ArrayLike) -> NDArray[np.float64]:
    """3x9 matrix with ``build_D(r) @ y == alpha x r + w x (w x r)``."""
    r1, r2, r3 = np.asarray(r, dtype=float)
    return np.array(
        [
            [0.0, -r1, -r1, 0.0, r3, r2, 0.0, r3, -r2],
            [-r2, 0.0, -r2, r3, 0.0, r1, -r3, 0.0, r1],
            [-r3, -r3, 0.0, r2, r1, 0.0, r2, -r1, 0.0],
        ]
    )


def build_E(n: int) -> NDArray[np.float64]:
    """Consecutive-difference operator: ``(build_E(n) @ a)[3i:3i+3] == a_i - a_{i+1}``."""
    if n < 2:
        raise ValueError(f"build_E needs n >= 2, got {n}")
    e = np.zeros((3 * (n - 1), 3 * n))
    eye = np.eye(3)
    for i in range(n - 1):
        e[3 * i : 3 * i + 3, 3 * i : 3 * i + 3] = eye
        e[3 * i : 3 * i + 3, 3 * i + 3 : 3 * i + 6] = -eye
    return e


def build_G(geom: SensorArrayGeometry) -> NDArray[np.float64]:
    p = geom.positions
    return np.vstack([build_D(p[i] - p[i + 1]) for i in range(geom.n - 1)])


def relative_displacement_matrix(geom: SensorArrayGeometry) -> NDArray[np.float64]:
    """(N-1)x3 matrix whose i-th row is ``r_i - r_{i+1}``.

    Every row uses the same sign as the blocks of ``build_G``; with that choice
    ``rank(G) == 3 * rank(S_d)``.
    """
    p = geom.positions
    return p[:-1] - p[1:]


def numerical_rank(a: ArrayLike, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > s[0] * rtol))


def analyze_geometry(geom: SensorArrayGeometry) -> GeometryAnalysis:
    s_d = relative_displacement_matrix(geom)
    sv = np.linalg.svd(s_d, compute_uv=False)
    sv = np.concatenate([sv, np.zeros(3 - sv.size)]) if sv.size < 3 else sv[:3]
    rank = numerical_rank(s_d)
    noncoplanar = rank == 3
    cond = float(sv[0] / sv[2]) if noncoplanar else float("inf")
    return GeometryAnalysis(
        s_d=s_d,
        singular_values=sv,
        condition_number=cond,
        sv_product=float(np.prod(sv)),
        rank=rank,
        noncoplanar=noncoplanar,
    )


def pseudoinverse(a: ArrayLike, rtol: float = RANK_RTOL) -> NDArray[np.float64]:
    """SVD pseudoinverse, discarding singular values below ``rtol * s_max``."""
    return np.linalg.pinv(np.asarray(a, dtype=float), rcond=rtol)


def noise_covariance(noise_std: ArrayLike, n: int) -> NDArray[np.float64]:
    """Block-diagonal 3N x 3N covariance from a scalar or per-sensor std (m/s^2)."""
    std = np.broadcast_to(np.asarray(noise_std, dtype=float), (n,))
    if np.any(std < 0) or not np.all(np.isfinite(std)):
        raise ValueError("noise std must be finite and non-negative")
    return np.diag(np.repeat(std**2, 3))


def require_noncoplanar(geom: SensorArrayGeometry) -> GeometryAnalysis:
    analysis = analyze_geometry(geom)
    if not analysis.noncoplanar:
        raise GeometryDegenerateError(
            f"sensor placement has rank(S_d)={analysis.rank}; need 3 non-coplanar displacements"
        )
    return analysis


def noise_gain_matrices(geom: SensorArrayGeometry, q: ArrayLike) -> NoiseGainSet:
    """Split ``pinv(G) @ E`` and build the decorrelating ``L`` and ``M``.

    Parameters
    ----------
    geom : SensorArrayGeometry
        Must be non-coplanar.
    q : array-like, shape (3N, 3N)
        Sensor noise covariance.

    Raises
    ------
    GeometryDegenerateError
        If the placement is coplanar.
    ConditioningError
        If ``d_omega2 @ q @ d_omega2.T`` cannot be inverted.
    """
    require_noncoplanar(geom)
    q = np.asarray(q, dtype=float)
    if q.shape != (3 * geom.n, 3 * geom.n):
        raise ValueError(f"q must be {3 * geom.n}x{3 * geom.n}, got {q.shape}")
    ge = pseudoinverse(build_G(geom)) @ build_E(geom.n)
    d_omega2, d_alpha = ge[:6], ge[6:]
    r_meas = d_omega2 @ q @ d_omega2.T
    cross = d_alpha @ q @ d_omega2.T
    s = np.linalg.svd(r_meas, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= s[0] * 1e-12:
        raise ConditioningError("measurement noise covariance D_w2 Q D_w2^T is singular")
    # L = -cross @ inv(r_meas), via a solve on the symmetric system
    l_mat = -np.linalg.solve(r_meas, cross.T).T
    m_mat = d_alpha + l_mat @ d_omega2
    return NoiseGainSet(d_omega2=d_omega2, d_alpha=d_alpha, l_mat=l_mat, m_mat=m_mat)
