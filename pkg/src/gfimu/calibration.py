"""Linear least-squares accelerometer calibration, ``a = S v + o``.

Each raw sample ``v`` contributes three rows ``V(v) @ y = a`` with
``y = [S row-major (9), o (3)]``. Stacking samples from at least four
orientations whose augmented vectors ``[v; 1]`` span R^4 makes ``y`` unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import UnidentifiableError
from .geometry import numerical_rank
from .simulator import GRAVITY

ORIENTATIONS = ("+x", "-x", "+y", "-y", "+z", "-z")


def known_acceleration(label: str, g: float = GRAVITY) -> NDArray[np.float64]:
    """Expected reading when the body axis ``label`` points along gravity.

    An accelerometer measures the support reaction, so with ``-x`` pointing
    down the sensor reads ``+g`` on x.
    """
    label = label.strip().replace("−", "-")
    if label not in ORIENTATIONS:
        raise ValueError(f"unknown orientation {label!r}; expected one of {ORIENTATIONS}")
    out = np.zeros(3)
    out["xyz".index(label[1])] = -g if label[0] == "+" else g
    return out


@dataclass(frozen=True)
class CalibrationParams:
    s: NDArray[np.float64]
    o: NDArray[np.float64]
    residual_rms: float = 0.0

    @classmethod
    def identity(cls) -> "CalibrationParams":
        return cls(np.eye(3), np.zeros(3))

    def to_dict(self) -> dict:
        return {"S": self.s.reshape(-1).tolist(), "o": self.o.tolist(), "residual_rms": self.residual_rms}


@dataclass
class CalibrationDataset:
    raw: NDArray[np.float64]  # (K, 3) counts
    known: NDArray[np.float64]  # (K, 3) m/s^2
    labels: list[str] | None = None

    @classmethod
    def from_orientations(
        cls, samples: Iterable[tuple[str, ArrayLike]], g: float = GRAVITY
    ) -> "CalibrationDataset":
        labels, raw = [], []
        for label, v in samples:
            labels.append(label)
            raw.append(np.asarray(v, dtype=float))
        raw_arr = np.array(raw, dtype=float).reshape(-1, 3)
        known = np.array([known_acceleration(lbl, g) for lbl in labels]).reshape(-1, 3)
        return cls(raw_arr, known, labels)


def build_V(v: ArrayLike) -> NDArray[np.float64]:
    v = np.asarray(v, dtype=float).reshape(3)
    V = np.zeros((3, 12))
    for i in range(3):
        V[i, 3 * i : 3 * i + 3] = v
        V[i, 9 + i] = 1.0
    return V


def solve_calibration(data: CalibrationDataset) -> CalibrationParams:
    raw = np.asarray(data.raw, dtype=float)
    known = np.asarray(data.known, dtype=float)
    n_orient = len(set(data.labels)) if data.labels is not None else None
    V = np.vstack([build_V(v) for v in raw]) if raw.shape[0] else np.zeros((0, 12))
    A = known.reshape(-1)
    rank = numerical_rank(V) if raw.shape[0] else 0
    if rank < 12:
        raise UnidentifiableError(
            f"stacked V has rank {rank} < 12; need four linearly independent orientations"
            + (f" (got {n_orient} distinct)" if n_orient is not None else ""),
            rank=rank,
            orientations=n_orient,
        )
    y, *_ = np.linalg.lstsq(V, A, rcond=None)
    resid = V @ y - A
    return CalibrationParams(
        s=y[:9].reshape(3, 3), o=y[9:].copy(), residual_rms=float(np.sqrt(np.mean(resid**2)))
    )


def apply_calibration(params: CalibrationParams, raw: ArrayLike) -> NDArray[np.float64]:
    """``S v + o``; accepts a single 3-vector or an (K, 3) array."""
    raw = np.asarray(raw, dtype=float)
    return raw @ params.s.T + params.o


def synthetic_dataset(
    s: ArrayLike,
    o: ArrayLike,
    samples_per_orientation: int = 1,
    noise_std: float = 0.0,
    orientations: Sequence[str] = ORIENTATIONS,
    g: float = GRAVITY,
    seed: int = 0,
) -> CalibrationDataset:
    """Raw counts a sensor with true ``(S, o)`` would produce in each orientation.

    Noise is added in acceleration units before inverting the sensor model.
    """
    s = np.asarray(s, dtype=float)
    o = np.asarray(o, dtype=float)
    rng = np.random.default_rng(seed)
    labels = [lbl for lbl in orientations for _ in range(samples_per_orientation)]
    known = np.array([known_acceleration(lbl, g) for lbl in labels])
    measured = known + rng.normal(0.0, noise_std, known.shape) if noise_std > 0 else known
    raw = np.linalg.solve(s, (measured - o).T).T
    return CalibrationDataset(raw, known, labels)
