"""State-space nonlinearities for angular-velocity estimation.

State is the body angular velocity ``x`` (rad/s). The measurement function
returns the quadratic monomials in the same order as the first six entries of
``y``: ``[x1^2, x2^2, x3^2, x2*x3, x3*x1, x1*x2]``.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .geometry import NoiseGainSet


def h(x: ArrayLike) -> NDArray[np.float64]:
    x1, x2, x3 = np.asarray(x, dtype=float)
    return np.array([x1 * x1, x2 * x2, x3 * x3, x2 * x3, x3 * x1, x1 * x2])


def h_jacobian(x: ArrayLike) -> NDArray[np.float64]:
    x1, x2, x3 = np.asarray(x, dtype=float)
    return np.array(
        [
            [2 * x1, 0.0, 0.0],
            [0.0, 2 * x2, 0.0],
            [0.0, 0.0, 2 * x3],
            [0.0, x3, x2],
            [x3, 0.0, x1],
            [x2, x1, 0.0],
        ]
    )


def y_vector(omega: ArrayLike, alpha: ArrayLike) -> NDArray[np.float64]:
    return np.concatenate([h(omega), np.asarray(alpha, dtype=float)])


def f_discrete(x: ArrayLike, a_hat: ArrayLike, T: float, gains: NoiseGainSet) -> NDArray[np.float64]:
    """One explicit-Euler step ``x + T * (M a_hat - L h(x))``."""
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    x = np.asarray(x, dtype=float)
    return x + T * (gains.m_mat @ np.asarray(a_hat, dtype=float) - gains.l_mat @ h(x))


def f_jacobian(x: ArrayLike, T: float, gains: NoiseGainSet) -> NDArray[np.float64]:
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    return np.eye(3) - T * gains.l_mat @ h_jacobian(x)
