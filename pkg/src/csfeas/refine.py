"""Least-squares de-biasing of sparse estimates and the refined CSP variants.

The support is the ``N`` largest-magnitude coordinates of the estimate
(ties go to the lower index) and the coefficients on it are the least
squares fit to ``y``.  The fit uses a complete orthogonal factorisation
(LAPACK ``gelsy``), which also returns the minimum-norm solution when the
selected columns are rank deficient.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import UsageError
from .model import Problem
from .solvers import SolveReport, SolverConfig, TraceRecord, _run_cs, csp_cs, ssp_cs

__all__ = [
    "NONE",
    "GAUSS_FINAL",
    "GAUSS_ALTERNATING",
    "CSP_THEN_SSP",
    "RefinePolicy",
    "default_support",
    "top_support",
    "ls_refine",
    "ls_augment",
    "gauss_csp",
    "gauss_csp_alternating",
    "csp_then_ssp",
    "refine",
]

NONE = "none"
GAUSS_FINAL = "gauss-final"
GAUSS_ALTERNATING = "gauss-alternating"
CSP_THEN_SSP = "csp-then-ssp"
_MODES = (NONE, GAUSS_FINAL, GAUSS_ALTERNATING, CSP_THEN_SSP)


@dataclass(frozen=True)
class RefinePolicy:
    mode: str = GAUSS_FINAL
    max_support: Optional[int] = None
    alternation_period: int = 50
    ssp_tail_iterations: int = 10

    def __post_init__(self):
        if self.mode not in _MODES:
            raise UsageError(f"unknown refine mode {self.mode!r}")
        if self.alternation_period < 1:
            raise UsageError("alternation_period must be >= 1")

    def support_for(self, P: Problem) -> int:
        N = self.max_support
        if N is None:
            if P.truth is None:
                raise UsageError("max_support must be given when the true sparseness is unknown")
            N = default_support(P.meta.get("s", P.truth.l0))
        if not 0 <= N < P.m:
            raise UsageError(f"max support N={N} must satisfy 0 <= N < m={P.m}")
        return int(N)


def default_support(s: int, factor: float = 1.5) -> int:
    """``ceil(factor * s)``."""
    return int(math.ceil(factor * s - 1e-12))


def top_support(x, N: int) -> np.ndarray:
    """Indices of the ``N`` largest ``|x_j|``, ties broken by lower index,
    returned in ascending index order."""
    order = np.argsort(-np.abs(np.asarray(x, dtype=np.float64)), kind="stable")
    return np.sort(order[:N])


def _lstsq(A, y):
    beta, *_ = scipy.linalg.lstsq(A, y, lapack_driver="gelsy", check_finite=False)
    return beta


def ls_refine(P: Problem, x, N: int) -> np.ndarray:
    """Least-squares refit of ``y`` on the ``N`` most significant entries of
    ``x``; every other coordinate of the result is exactly zero."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (P.n,):
        raise UsageError(f"estimate has shape {x.shape}, expected ({P.n},)")
    if N >= P.m:
        raise UsageError(f"max support N={N} must be < m={P.m}")
    if N < 0:
        raise UsageError(f"max support N={N} must be >= 0")
    out = np.zeros(P.n)
    if N == 0:
        return out
    G = top_support(x, N)
    out[G] = _lstsq(P.matrix.array[:, G], P.y)
    return out


def ls_augment(P: Problem, x, N: int) -> np.ndarray:
    """LS augmentation of an arbitrary solver's output (same as
    :func:`ls_refine`)."""
    return ls_refine(P, x, N)


def _ls_record(P, prev, x, sweep):
    r = float(np.linalg.norm(P.y - P.matrix.matvec(x)))
    return TraceRecord(sweep, r, float(np.sum(np.abs(x))), float(np.linalg.norm(x - prev)), "ls")


def _append_ls(P, report: SolveReport, N, monitor=None) -> SolveReport:
    prev = report.estimate
    x = ls_refine(P, prev, N)
    report.sweeps_run += 1
    report.trace.append(_ls_record(P, prev, x, report.sweeps_run))
    if monitor is not None:
        report.monitor.append(monitor(report.sweeps_run, x))
    report.estimate = x
    return report


def gauss_csp(P: Problem, cfg: SolverConfig, policy: RefinePolicy, z0=None, *, monitor=None):
    """CSP-CS to its stopping rule followed by one LS stage.

    The LS stage is recorded as an extra trace entry tagged ``"ls"``.
    """
    N = policy.support_for(P)
    report = csp_cs(P, cfg, z0, monitor=monitor)
    t = time.perf_counter()
    _append_ls(P, report, N, monitor)
    report.wall_time += time.perf_counter() - t
    return report


def gauss_csp_alternating(
    P: Problem, cfg: SolverConfig, policy: RefinePolicy, z0=None, *, monitor=None
):
    """CSP-CS with the iterate replaced by its LS refit every
    ``policy.alternation_period`` sweeps, plus a terminal LS stage."""
    N = policy.support_for(P)
    period = policy.alternation_period

    def post(sweep, x):
        return ls_refine(P, x, N) if sweep % period == 0 else x

    report = _run_cs(P, cfg, z0, post_sweep=post, monitor=monitor)
    t = time.perf_counter()
    _append_ls(P, report, N, monitor)
    report.wall_time += time.perf_counter() - t
    return report


def csp_then_ssp(P: Problem, cfg: SolverConfig, policy: RefinePolicy, z0=None, *, monitor=None):
    """CSP-CS to termination, then ``policy.ssp_tail_iterations`` SSP-CS
    iterations started from the CSP estimate (they may stop earlier on the
    step tolerance).  Traces are concatenated."""
    tail = int(policy.ssp_tail_iterations)
    if tail < 1:
        raise UsageError(f"ssp_tail_iterations must be >= 1, got {tail}")
    head = csp_cs(P, cfg, z0, monitor=monitor)
    rest = ssp_cs(
        P,
        cfg.replace(max_iterations=tail),
        head.estimate,
        monitor=monitor,
        sweep_offset=head.sweeps_run,
    )
    trace = list(head.trace)
    for rec in rest.trace:
        trace.append(rec._replace(sweep=rec.sweep + head.sweeps_run))
    return SolveReport(
        rest.estimate,
        head.iterations_run + rest.iterations_run,
        head.sweeps_run + rest.sweeps_run,
        rest.termination,
        head.wall_time + rest.wall_time,
        trace,
        head.monitor + rest.monitor,
    )


def refine(P: Problem, cfg: SolverConfig, policy: RefinePolicy, z0=None, *, monitor=None):
    """Dispatch on ``policy.mode``."""
    if policy.mode == NONE:
        return csp_cs(P, cfg, z0, monitor=monitor)
    if policy.mode == GAUSS_FINAL:
        return gauss_csp(P, cfg, policy, z0, monitor=monitor)
    if policy.mode == GAUSS_ALTERNATING:
        return gauss_csp_alternating(P, cfg, policy, z0, monitor=monitor)
    return csp_then_ssp(P, cfg, policy, z0, monitor=monitor)
