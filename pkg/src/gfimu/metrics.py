"""Estimation-error statistics.

"Standard error" here is the per-axis standard deviation of the instantaneous
error series ``estimate - truth``, not the standard error of the mean.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputError


@dataclass(frozen=True)
class ErrorReport:
    mean_error: list[float]  # deg/s
    standard_error: list[float]  # deg/s
    samples: int
    duration: float

    @property
    def mean_standard_error(self) -> float:
        return float(np.mean(self.standard_error))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mean_standard_error"] = self.mean_standard_error
        return d


def error_stats(estimate: ArrayLike, truth: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Per-axis mean and standard deviation of ``estimate - truth`` (same units in, same out)."""
    err = np.asarray(estimate, dtype=float) - np.asarray(truth, dtype=float)
    if err.shape[0] == 0:
        raise InputError("no samples to compare")
    return err.mean(axis=0), err.std(axis=0)


def align_truth(t_est: ArrayLike, t_truth: ArrayLike, w_truth: ArrayLike) -> tuple[NDArray, NDArray]:
    """Linearly interpolate truth onto the estimate timestamps inside the overlap.

    Returns the boolean mask of estimate rows kept and the interpolated truth.
    """
    t_est = np.asarray(t_est, dtype=float)
    t_truth = np.asarray(t_truth, dtype=float)
    w_truth = np.asarray(w_truth, dtype=float)
    if t_truth.size == 0 or t_est.size == 0:
        raise InputError("empty estimate or truth series")
    if np.any(np.diff(t_truth) <= 0):
        raise InputError("truth timestamps must be strictly increasing")
    keep = (t_est >= t_truth[0]) & (t_est <= t_truth[-1])
    if not np.any(keep):
        raise InputError("estimate and truth time ranges do not overlap")
    tk = t_est[keep]
    interp = np.column_stack([np.interp(tk, t_truth, w_truth[:, i]) for i in range(w_truth.shape[1])])
    return keep, interp


def error_report(t_est: ArrayLike, w_est: ArrayLike, t_truth: ArrayLike, w_truth: ArrayLike) -> ErrorReport:
    """Compare estimates against truth; all rates in deg/s."""
    t_est = np.asarray(t_est, dtype=float)
    keep, truth = align_truth(t_est, t_truth, w_truth)
    mean, std = error_stats(np.asarray(w_est, dtype=float)[keep], truth)
    tk = t_est[keep]
    return ErrorReport(
        mean_error=mean.tolist(),
        standard_error=std.tolist(),
        samples=int(keep.sum()),
        duration=float(tk[-1] - tk[0]),
    )
