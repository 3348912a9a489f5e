"""Cyclic and simultaneous subgradient projection solvers.

Two families live here:

* ``csp_generic`` / ``ssp_generic`` iterate over an arbitrary ordered list of
  :class:`~csfeas.constraints.ConvexConstraint` objects.  They are plain
  Python and meant for small feasibility problems and property tests.
* ``csp_cs`` / ``ssp_cs`` / ``kaczmarz`` specialise to the compressed
  sensing constraint family: one hyperplane per measurement row plus an
  l1 ball.  The cyclic sweep runs in compiled kernels.

Iteration accounting: relaxation schedules are evaluated at ``k`` = number
of completed sweeps, the iteration cap counts sweeps, and the step
tolerance compares estimates one sweep apart.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .constraints import ConvexConstraint, subgradient_step
from .errors import DegenerateConstraintError, DivergenceError, UsageError
from .model import Problem

__all__ = [
    "RELAX_MIN",
    "RELAX_MAX",
    "SolverConfig",
    "TraceRecord",
    "SolveReport",
    "StopDecision",
    "should_stop",
    "csp_generic",
    "ssp_generic",
    "csp_cs",
    "ssp_cs",
    "kaczmarz",
    "MAX_ITERATIONS",
    "STEP_TOLERANCE",
    "FEASIBLE",
]

RELAX_MIN = 1e-6
RELAX_MAX = 2.0 - 1e-6

MAX_ITERATIONS = "max-iterations"
STEP_TOLERANCE = "step-tolerance"
FEASIBLE = "feasible"

Schedule = Union[float, Callable[[int], float]]


def _evaluate(schedule, k, name):
    v = float(schedule(k)) if callable(schedule) else float(schedule)
    if not RELAX_MIN <= v <= RELAX_MAX:
        raise UsageError(f"{name} schedule gave {v} at k={k}, outside [{RELAX_MIN}, {RELAX_MAX}]")
    return v


@dataclass(frozen=True)
class SolverConfig:
    """Relaxation schedules, l1 budget and stopping rule.

    ``alpha`` and ``lam`` are either constants or callables of the sweep
    counter ``k`` (starting at 0).  ``max_iterations`` caps the number of
    sweeps.  ``ssp_weights`` is only read by the simultaneous solvers; when
    omitted uniform weights are used.
    """

    alpha: Schedule = 1.0
    lam: Schedule = 1.0
    l1_budget: float = 1.0
    max_iterations: int = 5000
    step_tolerance: float = 1e-8
    block_size: int = 256
    ssp_weights: Optional[Sequence[float]] = None

    def __post_init__(self):
        if not self.l1_budget > 0:
            raise UsageError(f"l1_budget must be > 0, got {self.l1_budget}")
        if int(self.max_iterations) < 1:
            raise UsageError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.step_tolerance > 0:
            raise UsageError(f"step_tolerance must be > 0, got {self.step_tolerance}")
        if int(self.block_size) < 1:
            raise UsageError(f"block_size must be >= 1, got {self.block_size}")
        if self.ssp_weights is not None:
            w = np.array(self.ssp_weights, dtype=np.float64)
            w.setflags(write=False)
            object.__setattr__(self, "ssp_weights", w)
        # fail early on constant schedules out of range
        for name in ("alpha", "lam"):
            if not callable(getattr(self, name)):
                _evaluate(getattr(self, name), 0, name)

    def alpha_at(self, k: int) -> float:
        return _evaluate(self.alpha, k, "alpha")

    def lam_at(self, k: int) -> float:
        return _evaluate(self.lam, k, "lambda")

    def weights(self, p: int) -> np.ndarray:
        """Validated simultaneous weights for ``p`` constraints."""
        if self.ssp_weights is None:
            return np.full(p, 1.0 / p)
        w = self.ssp_weights
        if w.ndim != 1 or w.size != p:
            raise UsageError(f"ssp_weights has {w.size} entries, expected {p}")
        if np.any(~(w > 0)):
            raise UsageError("ssp_weights must be strictly positive")
        if abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise UsageError(f"ssp_weights must sum to 1, sum is {np.sum(w)!r}")
        return w

    def replace(self, **changes) -> "SolverConfig":
        from dataclasses import replace

        return replace(self, **changes)


class TraceRecord(NamedTuple):
    sweep: int
    residual_l2: float
    l1_norm: float
    step_l2: float
    stage: str = "csp"


@dataclass
class SolveReport:
    estimate: np.ndarray
    iterations_run: int
    sweeps_run: int
    termination: str
    wall_time: float
    trace: List[TraceRecord] = field(default_factory=list)
    monitor: list = field(default_factory=list)

    @property
    def final_step(self) -> float:
        return self.trace[-1].step_l2 if self.trace else float("nan")

    def trace_array(self) -> np.ndarray:
        """Trace as an ``(sweeps, 4)`` array of sweep, residual, l1, step."""
        return np.array([r[:4] for r in self.trace], dtype=np.float64).reshape(-1, 4)


class StopDecision(NamedTuple):
    stop: bool
    reason: Optional[str]
    step: float

    def __bool__(self):
        return self.stop


def should_stop(prev, next, sweep: int, cfg: SolverConfig) -> StopDecision:
    """Stop when the sweep-to-sweep step is within tolerance or the sweep
    cap is reached.  The step test takes precedence."""
    prev = np.asarray(prev, dtype=np.float64)
    next = np.asarray(next, dtype=np.float64)
    if prev.shape != next.shape:
        raise UsageError(f"shape mismatch {prev.shape} vs {next.shape}")
    step = float(np.linalg.norm(next - prev))
    if step <= cfg.step_tolerance:
        return StopDecision(True, STEP_TOLERANCE, step)
    if sweep >= cfg.max_iterations:
        return StopDecision(True, MAX_ITERATIONS, step)
    return StopDecision(False, None, step)


def _initial(z0, n):
    if z0 is None:
        return np.zeros(n)
    z = np.array(z0, dtype=np.float64)
    if z.shape != (n,):
        raise UsageError(f"z0 has shape {z.shape}, expected ({n},)")
    return z


def _check_finite(z, sweep, iterations):
    if not np.all(np.isfinite(z)):
        bad = int(np.flatnonzero(~np.isfinite(z))[0])
        raise DivergenceError(
            f"non-finite iterate at sweep {sweep} (constraint visit {iterations}), coordinate {bad}",
            sweep,
        )


# --- generic solvers ------------------------------------------------------------


def _generic_dim(constraints, z0):
    if len(constraints) < 1:
        raise UsageError("need at least one constraint")
    z = np.array(z0, dtype=np.float64)
    if z.ndim != 1:
        raise UsageError("z0 must be a vector")
    return z


def csp_generic(
    constraints: Sequence[ConvexConstraint],
    z0,
    cfg: SolverConfig,
    on_step: Optional[Callable[[int, np.ndarray], None]] = None,
) -> SolveReport:
    """Cyclic subgradient projections over arbitrary convex constraints.

    Constraint ``i`` is visited at iterations ``k`` with ``k mod p == i``.
    Inactive constraints leave the iterate unchanged.  ``on_step`` is called
    after every constraint visit with the visit counter and the iterate.
    Terminates with ``"feasible"`` after a sweep in which no constraint was
    active.
    """
    z = _generic_dim(constraints, z0)
    t0 = time.perf_counter()
    trace = []
    visits = 0
    termination = MAX_ITERATIONS
    sweep = 0
    while True:
        sweep += 1
        alpha = cfg.alpha_at(sweep - 1)
        prev = z
        any_active = False
        for i, c in enumerate(constraints):
            fz = c.value(z)
            if c.is_active(z, fz):
                any_active = True
                z = subgradient_step(c, z, alpha, index=i)
            visits += 1
            if on_step is not None:
                on_step(visits, z)
        _check_finite(z, sweep, visits)
        decision = should_stop(prev, z, sweep, cfg)
        trace.append(TraceRecord(sweep, float("nan"), float(np.sum(np.abs(z))), decision.step))
        if not any_active:
            termination = FEASIBLE
            break
        if decision:
            termination = decision.reason
            break
    return SolveReport(z, visits, sweep, termination, time.perf_counter() - t0, trace)


def ssp_generic(constraints: Sequence[ConvexConstraint], z0, cfg: SolverConfig) -> SolveReport:
    """Simultaneous subgradient projections: all intermediate iterates are
    computed from the same point and combined with ``cfg.weights``."""
    z = _generic_dim(constraints, z0)
    w = cfg.weights(len(constraints))
    t0 = time.perf_counter()
    trace = []
    visits = 0
    sweep = 0
    while True:
        sweep += 1
        alpha = cfg.alpha_at(sweep - 1)
        prev = z
        any_active = False
        nxt = np.zeros_like(z)
        for i, c in enumerate(constraints):
            if c.is_active(z):
                any_active = True
            nxt += w[i] * subgradient_step(c, z, alpha, index=i)
            visits += 1
        z = nxt
        _check_finite(z, sweep, visits)
        decision = should_stop(prev, z, sweep, cfg)
        trace.append(TraceRecord(sweep, float("nan"), float(np.sum(np.abs(z))), decision.step, "ssp"))
        if not any_active:
            termination = FEASIBLE
            break
        if decision:
            termination = decision.reason
            break
    return SolveReport(z, visits, sweep, termination, time.perf_counter() - t0, trace)


# --- compressed sensing solvers ------------------------------------------------


def _check_rows(P: Problem):
    zero = np.flatnonzero(~(P.matrix.row_norms_sq > 0))
    if zero.size:
        raise DegenerateConstraintError(
            f"row {zero[0]} of the sensing matrix is zero; its hyperplane is degenerate",
            int(zero[0]),
        )


def _run_cs(
    P: Problem,
    cfg: SolverConfig,
    z0,
    *,
    use_l1: bool = True,
    simultaneous: bool = False,
    post_sweep: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
    monitor: Optional[Callable[[int, np.ndarray], object]] = None,
    sweep_offset: int = 0,
    stage: str = "csp",
) -> SolveReport:
    _check_rows(P)
    H = P.matrix.array
    y = P.y
    rn = P.matrix.row_norms_sq
    m, n = H.shape
    x = _initial(z0, n)
    block = int(cfg.block_size)
    budget = float(cfg.l1_budget)
    w = cfg.weights(m + 1) if simultaneous else None

    trace: List[TraceRecord] = []
    monitored = []
    visits = 0
    t0 = time.perf_counter()
    sweep = 0
    while True:
        sweep += 1
        k = sweep_offset + sweep - 1
        alpha = cfg.alpha_at(k)
        lam = cfg.lam_at(k) if use_l1 else 0.0
        prev = x.copy()
        if simultaneous:
            r = H @ x - y
            x = x - H.T @ (alpha * w[:m] * r / rn)
            if use_l1:
                excess = float(np.sum(np.abs(prev))) - budget
                if excess > 0.0:
                    x -= (w[m] * lam * excess / n) * np.where(prev >= 0, 1.0, -1.0)
        else:
            for start in range(0, m, block):
                _kernels.hyperplane_rows(H, y, rn, x, alpha, start, min(start + block, m))
            if use_l1:
                _kernels.l1_inplace(x, lam, budget)
        visits += m + (1 if use_l1 else 0)
        if post_sweep is not None:
            x = post_sweep(sweep, x)
        _check_finite(x, sweep, visits)
        decision = should_stop(prev, x, sweep, cfg)
        res = float(np.linalg.norm(y - H @ x))
        trace.append(TraceRecord(sweep, res, float(np.sum(np.abs(x))), decision.step, stage))
        if monitor is not None:
            monitored.append(monitor(sweep, x))
        if decision:
            break
    wall = time.perf_counter() - t0
    return SolveReport(x, visits, sweep, decision.reason, wall, trace, monitored)


def csp_cs(P: Problem, cfg: SolverConfig, z0=None, *, monitor=None) -> SolveReport:
    """Cyclic subgradient projections for ``y = Hx, ||x||_1 <= eps``.

    One sweep projects onto the ``m`` measurement hyperplanes in row order
    (always, since they are equalities) and then takes the l1 subgradient
    step when ``||x||_1 > eps``.  Rows are processed ``cfg.block_size`` at a
    time; the block size does not change the arithmetic.

    ``monitor(sweep, x)`` is called after every sweep and its return values
    are collected in ``report.monitor``.
    """
    return _run_cs(P, cfg, z0, monitor=monitor)


def ssp_cs(P: Problem, cfg: SolverConfig, z0=None, *, monitor=None, sweep_offset=0) -> SolveReport:
    """Simultaneous subgradient projections over the same ``m + 1`` sets.

    Each iteration forms every intermediate iterate from the same point and
    averages them with ``cfg.ssp_weights`` (uniform by default).
    """
    return _run_cs(
        P, cfg, z0, simultaneous=True, monitor=monitor, sweep_offset=sweep_offset, stage="ssp"
    )


def kaczmarz(P: Problem, cfg: SolverConfig, z0=None, *, monitor=None) -> SolveReport:
    """Cyclic hyperplane projections without the l1 constraint."""
    return _run_cs(P, cfg, z0, use_l1=False, monitor=monitor, stage="kaczmarz")
