"""Recovery error and Monte Carlo aggregates.

The per-run error is ``sqrt(||x - xhat||^2 / d(x))`` where ``d`` depends on
the truth's kind: ``sum(min(x_i^2, sigma^2))`` for sparse signals (the
ideal error) and ``||x||^2`` for compressible ones (the normalised error).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UndefinedMetricError, UsageError
from .model import COMPRESSIBLE, SPARSE, Signal

__all__ = [
    "RunResult",
    "normaliser",
    "recovery_error",
    "aggregate_error",
    "error_std",
    "recovery_index",
]


@dataclass(frozen=True)
class RunResult:
    error: float
    wall_time: float
    iterations: int
    method: str
    scenario: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.error) and self.error >= 0):
            raise UsageError(f"error must be finite and >= 0, got {self.error}")


def normaliser(x: Signal, sigma: float) -> float:
    v = x.values
    if x.kind == SPARSE:
        if not sigma > 0:
            raise UsageError("the ideal error of a sparse signal needs sigma > 0")
        return float(np.sum(np.minimum(v * v, sigma * sigma)))
    if x.kind == COMPRESSIBLE:
        return float(np.dot(v, v))
    raise UsageError(f"unknown signal kind {x.kind!r}")


def recovery_error(x: Signal, xhat, sigma: float) -> float:
    xhat = np.asarray(xhat, dtype=np.float64)
    if xhat.shape != x.values.shape:
        raise UsageError(f"estimate has shape {xhat.shape}, expected {x.values.shape}")
    d = normaliser(x, sigma)
    if not d > 0:
        raise UndefinedMetricError("recovery error undefined for a zero signal")
    diff = x.values - xhat
    return math.sqrt(float(np.dot(diff, diff)) / d)


def aggregate_error(errors: Sequence[float]) -> float:
    """Root mean square of per-run errors."""
    e = np.asarray(errors, dtype=np.float64)
    if e.size == 0:
        raise UsageError("no errors to aggregate")
    if not np.all(np.isfinite(e)):
        raise UsageError("errors must be finite")
    top = float(np.max(np.abs(e)))
    if top == 0.0:
        return 0.0
    # scaled to avoid underflow of tiny errors
    return top * math.sqrt(float(np.mean((e / top) ** 2)))


def error_std(errors: Sequence[float]) -> float:
    """Sample standard deviation (0 for a single run), for error bars."""
    e = np.asarray(errors, dtype=np.float64)
    if e.size == 0:
        raise UsageError("no errors to aggregate")
    return float(np.std(e, ddof=1)) if e.size > 1 else 0.0


def recovery_index(s: int, m: int, n: int) -> float:
    """``(s / m) * ln(n)``."""
    if m < 1 or n < 1:
        raise UsageError("m and n must be >= 1")
    return s / m * math.log(n)
