"""Experiment harness: method dispatch, bench config files, Monte Carlo
campaigns and their CSV outputs.

Bench config format
-------------------
A flat ``key = value`` text file.  Keys before the first ``[method]`` line
describe the scenario and campaign; each ``[method]`` block adds one method
entry.  ``#`` starts a comment.  Example::

    scenario = gaussian
    m = 512
    n = 1024
    indices = 0.1, 0.6
    sigma = 0.01
    runs = 25
    seed = 2024

    [method]
    name = csp
    preset = paper

    [method]
    name = gauss-csp
    preset = paper
    support_factor = 1.5

Scenario keys: ``scenario`` (gaussian | dft | phantom), ``m``, ``n``,
``indices`` or ``s`` (comma separated cells), ``sigma``, ``runs``,
``seed``, ``output``, ``n_freqs``, ``side``, ``lines``, ``embedding``.
Method keys: ``name``, ``label``, ``preset``, ``alpha``, ``lam``,
``epsilon``, ``max_sweeps``, ``gamma``, ``block_size``, ``support``,
``support_factor``, ``period``, ``ssp_tail``, ``residual_tolerance``.
"""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from . import refine as rf
from .baselines import OmpConfig, omp_path
from .errors import CSFeasError, ProblemFormatError, UsageError
from .metrics import aggregate_error, error_std, recovery_error
from .model import Problem
from .presets import preset_config
from .rng import run_seed
from ._kernels import warmup
from .scenarios import DFT, GAUSSIAN, PHANTOM, ScenarioSpec, generate
from .solvers import SolveReport, SolverConfig, csp_cs, kaczmarz, ssp_cs

__all__ = [
    "METHODS",
    "MethodSpec",
    "ExperimentSpec",
    "MethodOutcome",
    "run_method",
    "parse_bench_config",
    "load_bench_config",
    "run_bench",
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
    "TRACE_COLUMNS",
    "fmt_float",
    "write_trace_csv",
    "write_pgm",
    "OUTPUT_DIR_ENV",
]

METHODS = ("csp", "ssp", "kaczmarz", "gauss-csp", "gauss-csp-alt", "csp-ssp", "omp", "omp-ls")
SCENARIO_ALIASES = {
    "gaussian": GAUSSIAN,
    GAUSSIAN: GAUSSIAN,
    "dft": DFT,
    DFT: DFT,
    "phantom": PHANTOM,
    PHANTOM: PHANTOM,
}
REFINE_MODE = {
    "csp": rf.NONE,
    "ssp": rf.NONE,
    "kaczmarz": rf.NONE,
    "gauss-csp": rf.GAUSS_FINAL,
    "gauss-csp-alt": rf.GAUSS_ALTERNATING,
    "csp-ssp": rf.CSP_THEN_SSP,
    "omp": rf.NONE,
    "omp-ls": "ls-augment",
}
NEEDS_SUPPORT = {"gauss-csp", "gauss-csp-alt", "omp", "omp-ls"}

RESULT_COLUMNS = (
    "scenario", "method", "refine_mode", "m", "n", "s", "index", "run", "seed",
    "error", "time_sec", "iterations", "termination",
)  # fmt: skip
SUMMARY_COLUMNS = (
    "scenario", "method", "refine_mode", "m", "n", "index", "runs", "failures",
    "rms_error", "std_error", "median_time_sec", "mean_iterations",
)  # fmt: skip
TRACE_COLUMNS = ("sweep", "residual_l2", "l1_norm", "step_l2")

OUTPUT_DIR_ENV = "CSFEAS_OUTPUT_DIR"


def fmt_float(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return format(float(v), ".9g")


# --- methods ------------------------------------------------------------------


@dataclass(frozen=True)
class MethodSpec:
    """One method entry: solver settings plus refinement/support options.

    Unset solver fields fall back to ``preset`` (``"paper"`` picks the
    paper schedule for the problem's dimension) or to ``SolverConfig``
    defaults when ``preset`` is ``"none"``.
    """

    name: str
    label: Optional[str] = None
    preset: str = "paper"
    alpha: Optional[float] = None
    lam: Optional[float] = None
    epsilon: Optional[float] = None
    max_sweeps: Optional[int] = None
    gamma: Optional[float] = None
    block_size: Optional[int] = None
    support: Optional[int] = None
    support_factor: float = 1.5
    period: int = 50
    ssp_tail: int = 10
    residual_tolerance: float = 0.0

    def __post_init__(self):
        if self.name not in METHODS:
            raise UsageError(f"unknown method {self.name!r}; expected one of {', '.join(METHODS)}")

    @property
    def tag(self) -> str:
        return self.label or self.name

    def solver_config(self, n: int) -> SolverConfig:
        if self.preset in ("none", ""):
            cfg = SolverConfig()
        else:
            cfg = preset_config(self.preset, n)
        overrides = {}
        for attr, key in (
            ("alpha", "alpha"),
            ("lam", "lam"),
            ("epsilon", "l1_budget"),
            ("max_sweeps", "max_iterations"),
            ("gamma", "step_tolerance"),
            ("block_size", "block_size"),
        ):
            v = getattr(self, attr)
            if v is not None:
                overrides[key] = v
        return cfg.replace(**overrides) if overrides else cfg

    def support_size(self, P: Problem, s: Optional[int] = None) -> int:
        if self.support is not None:
            return int(self.support)
        if s is None:
            if P.truth is None:
                raise UsageError(f"method {self.name} needs a support size or a known sparseness")
            s = int(P.meta.get("s", P.truth.l0))
        return rf.default_support(s, self.support_factor)

    def policy(self, N: Optional[int]) -> rf.RefinePolicy:
        mode = REFINE_MODE[self.name]
        if mode not in (rf.GAUSS_FINAL, rf.GAUSS_ALTERNATING, rf.CSP_THEN_SSP):
            mode = rf.NONE
        return rf.RefinePolicy(mode, N, self.period, self.ssp_tail)


@dataclass
class MethodOutcome:
    estimate: np.ndarray
    wall_time: float
    iterations: int
    termination: str
    report: Optional[SolveReport] = None


def _omp_outcome(P, N, spec: MethodSpec, augment: bool):
    t0 = time.perf_counter()
    res = omp_path(P, OmpConfig(N, spec.residual_tolerance))
    x = res.estimate
    if augment:
        x = rf.ls_augment(P, x, N)
    wall = time.perf_counter() - t0
    k = len(res.support)
    if k >= N:
        term = "max-support"
    elif res.residual_norms[-1] <= spec.residual_tolerance:
        term = "residual-tolerance"
    else:
        term = "exhausted"
    return MethodOutcome(x, wall, k, term)


def run_method(
    P: Problem,
    spec: MethodSpec,
    s: Optional[int] = None,
    *,
    z0=None,
    monitor=None,
    cache: Optional[dict] = None,
) -> MethodOutcome:
    """Run one method on ``P``.

    ``cache`` may be shared between methods applied to the same problem: a
    plain CSP run is stored under its solver configuration and reused by a
    later ``csp`` or ``gauss-csp`` entry with the same configuration, since
    Gauss-CSP is exactly that run followed by one LS stage.
    """
    name = spec.name
    N = spec.support_size(P, s) if name in NEEDS_SUPPORT else None
    if name in ("omp", "omp-ls"):
        return _omp_outcome(P, N, spec, augment=name == "omp-ls")

    cfg = spec.solver_config(P.n)
    if name in ("csp", "gauss-csp") and monitor is None and z0 is None:
        key = _cache_key(cfg)
        report = cache.get(key) if (cache is not None and key is not None) else None
        if report is None:
            report = csp_cs(P, cfg)
            if cache is not None and key is not None:
                cache[key] = report
        if name == "csp":
            return MethodOutcome(report.estimate, report.wall_time, report.sweeps_run, report.termination, report)
        t0 = time.perf_counter()
        x = rf.ls_refine(P, report.estimate, N)
        wall = report.wall_time + (time.perf_counter() - t0)
        return MethodOutcome(x, wall, report.sweeps_run + 1, report.termination, report)

    if name == "csp":
        report = csp_cs(P, cfg, z0, monitor=monitor)
    elif name == "ssp":
        report = ssp_cs(P, cfg, z0, monitor=monitor)
    elif name == "kaczmarz":
        report = kaczmarz(P, cfg, z0, monitor=monitor)
    else:
        report = rf.refine(P, cfg, spec.policy(N), z0, monitor=monitor)
    return MethodOutcome(report.estimate, report.wall_time, report.sweeps_run, report.termination, report)


def _cache_key(cfg: SolverConfig):
    if cfg.ssp_weights is not None:
        return None
    try:
        key = (cfg.alpha, cfg.lam, cfg.l1_budget, cfg.max_iterations, cfg.step_tolerance, cfg.block_size)
        hash(key)
    except TypeError:
        return None
    return key


# --- experiment configs -------------------------------------------------------


@dataclass
class ExperimentSpec:
    scenario: ScenarioSpec
    methods: List[MethodSpec]
    cells: List[float]
    cell_kind: str = "index"
    monte_carlo_runs: int = 1
    master_seed: int = 0
    output_dir: Optional[str] = None

    def __post_init__(self):
        if not self.methods:
            raise UsageError("an experiment needs at least one [method] entry")
        if self.monte_carlo_runs < 1:
            raise UsageError("runs must be >= 1")
        if not self.cells:
            self.cells = [float("nan")]

    def cell_scenario(self, cell, seed) -> ScenarioSpec:
        sc = self.scenario
        if self.cell_kind == "index" and not math.isnan(cell):
            sc = replace(sc, index=float(cell), s=None)
        elif self.cell_kind == "s":
            sc = replace(sc, s=int(cell), index=None)
        return sc.with_seed(seed)


_INT_KEYS = {"m", "n", "runs", "seed", "n_freqs", "side", "lines", "max_sweeps", "block_size", "support", "period", "ssp_tail"}
_FLOAT_KEYS = {"sigma", "alpha", "lam", "epsilon", "gamma", "support_factor", "residual_tolerance", "index_tolerance"}
_SCENARIO_KEYS = {"scenario", "m", "n", "indices", "s", "sigma", "runs", "seed", "output", "n_freqs", "side", "lines", "embedding", "phantom", "index_tolerance"}
_METHOD_KEYS = {"name", "label", "preset", "alpha", "lam", "epsilon", "max_sweeps", "gamma", "block_size", "support", "support_factor", "period", "ssp_tail", "residual_tolerance"}


def _convert(key, value, lineno):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ProblemFormatError(f"{key}: cannot parse {value!r}", lineno) from None
    return value


def parse_bench_config(text: str) -> ExperimentSpec:
    top = {}
    blocks = []
    current = top
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[method]":
            current = {}
            blocks.append(current)
            continue
        if line.startswith("["):
            raise ProblemFormatError(f"unknown section {line}", lineno)
        if "=" not in line:
            raise ProblemFormatError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        allowed = _SCENARIO_KEYS if current is top else _METHOD_KEYS
        if key not in allowed:
            raise ProblemFormatError(f"unknown key {key!r}", lineno)
        if key in current:
            raise ProblemFormatError(f"duplicate key {key!r}", lineno)
        if key in ("indices", "s"):
            try:
                current[key] = [float(v) for v in value.split(",") if v.strip()]
            except ValueError:
                raise ProblemFormatError(f"{key}: cannot parse {value!r}", lineno) from None
        else:
            current[key] = _convert(key, value, lineno)

    family = SCENARIO_ALIASES.get(top.get("scenario", "gaussian"))
    if family is None:
        raise UsageError(f"unknown scenario {top.get('scenario')!r}")
    if "indices" in top and "s" in top:
        raise UsageError("give either indices or s, not both")
    if "s" in top:
        cells, kind = top["s"], "s"
    else:
        cells, kind = top.get("indices", []), "index"
    if family == PHANTOM:
        kind = "none"
    scenario = ScenarioSpec(
        family=family,
        m=top.get("m"),
        n=top.get("n"),
        noise_sigma=top.get("sigma", 0.01 if family == GAUSSIAN else 0.0),
        n_freqs=top.get("n_freqs"),
        side=top.get("side"),
        lines=top.get("lines"),
        embedding=top.get("embedding", "hermitian"),
        phantom=top.get("phantom", "modified"),
        index_tolerance=top.get("index_tolerance", 0.25),
    )
    if "name" in top:
        raise UsageError("method keys must follow a [method] line")
    methods = []
    for b in blocks:
        if "name" not in b:
            raise UsageError("each [method] block needs a name")
        methods.append(MethodSpec(**b))
    return ExperimentSpec(
        scenario=scenario,
        methods=methods,
        cells=list(cells),
        cell_kind=kind,
        monte_carlo_runs=top.get("runs", 1),
        master_seed=top.get("seed", 0),
        output_dir=top.get("output"),
    )


def load_bench_config(path) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_bench_config(fh.read())


# --- campaigns ------------------------------------------------------------------


def _run_task(exp: ExperimentSpec, ci: int, cell, run: int, traces: bool):
    seed = run_seed(exp.master_seed, run, cell=ci)
    sc = exp.cell_scenario(cell, seed)
    base = {
        "scenario": sc.family,
        "index": "" if math.isnan(cell) or exp.cell_kind != "index" else fmt_float(cell),
        "run": run,
        "seed": seed,
    }
    rows, trace_out = [], []
    try:
        P = generate(sc)
    except CSFeasError as exc:
        for spec in exp.methods:
            rows.append(_failed_row(base, spec, sc.m, sc.n, "", exc))
        return rows, trace_out
    s = P.meta.get("s")
    cache = {}
    for spec in exp.methods:
        row = dict(base, method=spec.tag, refine_mode=REFINE_MODE[spec.name], m=P.m, n=P.n, s=s)
        try:
            out = run_method(P, spec, s, cache=cache)
            err = recovery_error(P.truth, out.estimate, P.noise_sigma)
        except (CSFeasError, np.linalg.LinAlgError) as exc:
            rows.append(_failed_row(base, spec, P.m, P.n, s, exc))
            continue
        row.update(
            error=fmt_float(err),
            time_sec=fmt_float(out.wall_time),
            iterations=out.iterations,
            termination=out.termination,
        )
        rows.append(row)
        if traces and out.report is not None:
            trace_out.append((spec.tag, ci, run, out.report))
    return rows, trace_out


def _failed_row(base, spec, m, n, s, exc):
    return dict(
        base,
        method=spec.tag,
        refine_mode=REFINE_MODE[spec.name],
        m=m,
        n=n,
        s=s,
        error="",
        time_sec="",
        iterations="",
        termination=f"failed:{type(exc).__name__}",
    )


def summarize(rows) -> list:
    groups = {}
    for r in rows:
        key = (r["scenario"], r["method"], r["refine_mode"], r["m"], r["n"], r["index"])
        groups.setdefault(key, []).append(r)
    out = []
    for key, grp in groups.items():
        ok = [r for r in grp if r["error"] != ""]
        errs = [float(r["error"]) for r in ok]
        times = [float(r["time_sec"]) for r in ok]
        its = [float(r["iterations"]) for r in ok]
        out.append(
            dict(
                zip(("scenario", "method", "refine_mode", "m", "n", "index"), key),
                runs=len(grp),
                failures=len(grp) - len(ok),
                rms_error=fmt_float(aggregate_error(errs)) if errs else "",
                std_error=fmt_float(error_std(errs)) if errs else "",
                median_time_sec=fmt_float(statistics.median(times)) if times else "",
                mean_iterations=fmt_float(sum(its) / len(its)) if its else "",
            )
        )
    return out


def _write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: r.get(c, "") for c in columns})


def write_trace_csv(path, report: SolveReport):
    rows = [
        {"sweep": t.sweep, "residual_l2": fmt_float(t.residual_l2), "l1_norm": fmt_float(t.l1_norm), "step_l2": fmt_float(t.step_l2)}
        for t in report.trace
    ]
    _write_csv(path, TRACE_COLUMNS, rows)


@dataclass
class BenchResult:
    rows: list
    summary: list
    output_dir: Optional[str] = None
    files: list = field(default_factory=list)


def run_bench(
    exp: ExperimentSpec,
    output_dir: Optional[str] = None,
    threads: int = 1,
    write_traces: bool = True,
) -> BenchResult:
    """Run every (cell, run) task and every method on its problem.

    Rows are ordered by cell, run and method entry regardless of thread
    count.  Failures are recorded as rows with a ``failed:`` termination.
    """
    out_dir = output_dir or exp.output_dir or os.environ.get(OUTPUT_DIR_ENV)
    warmup()  # keep JIT compilation out of the timed solves
    tasks = [(ci, cell, run) for ci, cell in enumerate(exp.cells) for run in range(exp.monte_carlo_runs)]
    traces = write_traces and out_dir is not None
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: _run_task(exp, *t, traces), tasks))
    else:
        results = [_run_task(exp, *t, traces) for t in tasks]
    rows = [r for res, _ in results for r in res]
    summary = summarize(rows)
    files = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        p = os.path.join(out_dir, "results.csv")
        _write_csv(p, RESULT_COLUMNS, rows)
        files.append(p)
        p = os.path.join(out_dir, "summary.csv")
        _write_csv(p, SUMMARY_COLUMNS, summary)
        files.append(p)
        multi = len(exp.cells) > 1 or len(exp.methods) > 1
        for _, trace_list in results:
            for tag, ci, run, report in trace_list:
                name = f"trace_{run}.csv" if not multi else f"trace_{tag}_c{ci}_{run}.csv"
                p = os.path.join(out_dir, name)
                write_trace_csv(p, report)
                files.append(p)
    return BenchResult(rows, summary, out_dir, files)


# --- images -------------------------------------------------------------------


def write_pgm(path, img, vmin: float = 0.0, vmax: float = 1.0) -> None:
    """Binary 8-bit portable graymap, linearly mapping [vmin, vmax] to
    [0, 255] with clipping."""
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2:
        raise UsageError("image must be 2-D")
    scaled = np.clip((a - vmin) / (vmax - vmin), 0.0, 1.0)
    data = np.rint(scaled * 255.0).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ProblemFormatError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    data = np.frombuffer(parts[4][: w * h], dtype=np.uint8)
    return data.reshape(h, w).astype(np.float64) / maxval
