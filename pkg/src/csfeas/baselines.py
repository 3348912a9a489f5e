"""Orthogonal matching pursuit.

Columns are not normalised before the correlation test, so badly scaled
dictionaries bias selection toward large-norm columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConstraintError, UsageError
from .model import Problem

__all__ = ["OmpConfig", "OmpResult", "omp", "omp_path"]


@dataclass(frozen=True)
class OmpConfig:
    max_support: int
    residual_tolerance: float = 0.0

    def __post_init__(self):
        if self.max_support < 0:
            raise UsageError("max_support must be >= 0")
        if not self.residual_tolerance >= 0:
            raise UsageError("residual_tolerance must be >= 0")


@dataclass
class OmpResult:
    estimate: np.ndarray
    support: list
    residual_norms: list


def omp_path(P: Problem, cfg: OmpConfig) -> OmpResult:
    """OMP with the selection history and residual norms.

    The orthonormal basis of the selected columns is grown by modified
    Gram-Schmidt with one re-orthogonalisation pass, so every residual is
    orthogonal to the chosen columns to working precision.
    """
    H = P.matrix.array
    m, n = H.shape
    N = int(cfg.max_support)
    if N > m:
        raise UsageError(f"max_support N={N} must be <= m={m}")
    y = P.y
    r = y.copy()
    Q = np.empty((m, N))
    support = []
    excluded = []
    norms = [float(np.linalg.norm(r))]
    k = 0
    while k < N:
        if norms[-1] <= cfg.residual_tolerance:
            break
        corr = np.abs(H.T @ r)
        corr[support] = -1.0
        corr[excluded] = -1.0
        top = float(np.max(corr))
        # lowest index among correlations equal up to rounding
        j = int(np.flatnonzero(corr >= top * (1.0 - 1e-12))[0])
        if corr[j] <= 0.0:
            # residual orthogonal to every remaining column
            break
        col = H[:, j]
        cn = float(np.linalg.norm(col))
        if cn == 0.0:
            raise DegenerateConstraintError(f"selected column {j} is zero", j)
        q = col.copy()
        for _ in range(2):
            q -= Q[:, :k] @ (Q[:, :k].T @ q)
        qn = float(np.linalg.norm(q))
        if qn <= 1e-10 * cn:
            # column lies in the span of the support
            excluded.append(j)
            continue
        q /= qn
        Q[:, k] = q
        support.append(j)
        r = r - q * float(q @ r)
        norms.append(float(np.linalg.norm(r)))
        k += 1

    x = np.zeros(n)
    if support:
        A = H[:, support]
        # coefficients from the QR of the selected columns
        R = Q[:, : len(support)].T @ A
        x[support] = np.linalg.solve(np.triu(R), Q[:, : len(support)].T @ y)
    return OmpResult(x, support, norms)


def omp(P: Problem, cfg: OmpConfig) -> np.ndarray:
    """Greedy sparse approximation of ``y`` by at most ``cfg.max_support``
    columns of ``H``; ties in the correlation go to the lower index."""
    return omp_path(P, cfg).estimate
