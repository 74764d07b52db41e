"""Least-squares fits of sweep results."""

import logging
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from ..errors import DegenerateSweep
from .plan import BenchRow

logger = logging.getLogger(__name__)

MIN_SWEEP_POINTS = 4


class FitResult(BaseModel):
    metric: str
    slope: float
    intercept: float
    r_squared: float
    x: List[float]
    y: List[float]
    log_log: bool = True


def fit_points(x: Sequence[float], y: Sequence[float], metric: str, log_log: bool = True) -> FitResult:
    """
    Ordinary least squares of ``y`` on ``x``, on log-log axes unless ``log_log`` is off.

    Raises:
        DegenerateSweep: Fewer than four distinct x values, or non-positive values on log axes
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if len(xs) != len(ys):
        raise DegenerateSweep(f"{len(xs)} x values but {len(ys)} y values for {metric}")
    if len(np.unique(xs)) < MIN_SWEEP_POINTS:
        raise DegenerateSweep(f"Fitting {metric} needs {MIN_SWEEP_POINTS} distinct sweep points, got {len(np.unique(xs))}")
    if log_log:
        if np.any(xs <= 0) or np.any(ys <= 0):
            raise DegenerateSweep(f"{metric} has non-positive values; cannot fit on log axes")
        fx, fy = np.log(xs), np.log(ys)
    else:
        fx, fy = xs, ys
    slope, intercept = np.polyfit(fx, fy, 1)
    residual = float(np.sum((fy - (slope * fx + intercept)) ** 2))
    total = float(np.sum((fy - fy.mean()) ** 2))
    if total == 0.0:
        r_squared = 1.0 if residual < 1e-18 else 0.0
    else:
        r_squared = 1.0 - residual / total
    return FitResult(metric=metric, slope=float(slope), intercept=float(intercept), r_squared=r_squared,
                     x=xs.tolist(), y=ys.tolist(), log_log=log_log)


def _axes(rows: Sequence[BenchRow], metric: str, x: Optional[str]):
    if not rows:
        raise DegenerateSweep("No rows to fit")
    if metric not in BenchRow.model_fields:
        raise DegenerateSweep(f"Unknown metric {metric!r}")
    xs = [getattr(r, x) if x else r.sweep_point for r in rows]
    ys = [getattr(r, metric) for r in rows]
    return xs, ys


def fit_scaling(rows: Sequence[BenchRow], metric: str, x: Optional[str] = None) -> FitResult:
    """Growth order of ``metric`` over the sweep: the log-log slope."""
    xs, ys = _axes(rows, metric, x)
    return fit_points(xs, ys, metric, log_log=True)


def fit_linear(rows: Sequence[BenchRow], metric: str, x: Optional[str] = None) -> FitResult:
    xs, ys = _axes(rows, metric, x)
    return fit_points(xs, ys, metric, log_log=False)
