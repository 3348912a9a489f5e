"""Compiled inner loops for the row-action sweeps.

Loops are written without fastmath so the floating point operation order
is fixed; splitting a sweep into blocks of rows therefore cannot change
the result.
"""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def hyperplane_rows(H, y, row_norms_sq, x, alpha, start, stop):
    """Apply relaxed hyperplane projections for rows ``start:stop`` in place."""
    n = H.shape[1]
    for i in range(start, stop):
        d = 0.0
        for j in range(n):
            d += H[i, j] * x[j]
        c = alpha * (d - y[i]) / row_norms_sq[i]
        for j in range(n):
            x[j] -= c * H[i, j]


@numba.njit(cache=True, nogil=True)
def l1_inplace(x, lam, budget):
    """In-place l1 subgradient step; returns True if the step was active."""
    n = x.shape[0]
    l1 = 0.0
    for j in range(n):
        l1 += abs(x[j])
    excess = l1 - budget
    if excess <= 0.0:
        return False
    c = lam * excess / n
    for j in range(n):
        if x[j] >= 0.0:
            x[j] -= c
        else:
            x[j] += c
    return True


def warmup():
    """Trigger compilation so the first timed solve excludes JIT cost."""
    H = np.ones((1, 2))
    x = np.zeros(2)
    hyperplane_rows(H, np.ones(1), np.full(1, 2.0), x, 1.0, 0, 1)
    l1_inplace(x, 1.0, 0.1)
