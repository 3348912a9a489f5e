"""Command line entry point: ``csfeas generate|solve|bench|phantom``.

Exit codes: 0 success, 2 usage error, 3 data or parse error, 4 numerical
failure.  Output directories default to ``$CSFEAS_OUTPUT_DIR`` (or the
current directory when unset).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import harness as hn
from .errors import CSFeasError, ProblemFormatError, UsageError
from .metrics import recovery_error
from .model import load_problem, save_problem
from .presets import PRESETS
from .rng import BIT_GENERATOR
from .scenarios import DFT, GAUSSIAN, PHANTOM, ScenarioSpec, generate

__all__ = ["main", "build_parser", "sidecar_path", "read_sidecar"]

_FAMILY = {"gaussian": GAUSSIAN, "dft": DFT, "phantom": PHANTOM}


def sidecar_path(problem_path) -> str:
    return str(problem_path) + ".json"


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    if isinstance(v, dict):
        return {k: _jsonable(u) for k, u in v.items()}
    return v


def read_sidecar(problem_path) -> dict:
    p = sidecar_path(problem_path)
    if not os.path.exists(p):
        return {}
    try:
        with open(p, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{p}: bad sidecar JSON ({exc.msg})", exc.lineno) from None


def _default_dir(arg):
    return arg or os.environ.get(hn.OUTPUT_DIR_ENV) or "."


# --- generate -------------------------------------------------------------------


def cmd_generate(args) -> int:
    family = _FAMILY[args.family]
    spec = ScenarioSpec(
        family=family,
        m=args.m,
        n=args.n,
        s=args.s,
        index=args.index,
        noise_sigma=args.sigma if args.sigma is not None else (0.01 if family == GAUSSIAN else 0.0),
        seed=args.seed,
        n_freqs=args.n_freqs,
        side=args.side,
        lines=args.lines,
        embedding=args.embedding,
    )
    P = generate(spec)
    out = args.output
    if not os.path.isabs(out) and os.path.dirname(out) == "":
        out = os.path.join(_default_dir(None), out)
    save_problem(P, out)
    meta = {k: v for k, v in P.meta.items()}
    record = {
        "seed": int(args.seed),
        "bit_generator": BIT_GENERATOR,
        "spec": {k: _jsonable(v) for k, v in vars(spec).items()},
        "s": meta.pop("s", None),
        "index": meta.pop("index", None),
        "meta": _jsonable(meta),
    }
    with open(sidecar_path(out), "w", encoding="utf-8") as fh:
        json.dump(_jsonable(record), fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out} m={P.m} n={P.n} s={record['s']} index={hn.fmt_float(record['index'])}")
    return 0


# --- solve ----------------------------------------------------------------------


def _method_spec(args, name=None) -> hn.MethodSpec:
    return hn.MethodSpec(
        name=name or args.method,
        preset=args.preset,
        alpha=args.alpha,
        lam=args.lam,
        epsilon=args.epsilon,
        max_sweeps=args.max_sweeps,
        gamma=args.gamma,
        block_size=args.block_size,
        support=args.support,
        support_factor=args.support_factor,
        period=args.period,
        ssp_tail=args.ssp_tail,
    )


def _write_vector(path, x):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(x):
            fh.write(f"{i},{hn.fmt_float(v)}\n")


def cmd_solve(args) -> int:
    spec = _method_spec(args)
    if args.trace_out and spec.name in ("omp", "omp-ls"):
        raise UsageError(f"method {spec.name} produces no per-sweep trace")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            P = load_problem(args.problem)
    except OSError as exc:
        raise ProblemFormatError(f"cannot read {args.problem}: {exc.strerror}") from None
    side = read_sidecar(args.problem)
    s = side.get("s")
    out = hn.run_method(P, spec, s)
    err = recovery_error(P.truth, out.estimate, P.noise_sigma) if P.truth is not None else float("nan")
    print(
        f"method={spec.name} error={hn.fmt_float(err) or 'nan'} time_sec={hn.fmt_float(out.wall_time)} "
        f"iterations={out.iterations} termination={out.termination}"
    )
    if args.estimate_out:
        _write_vector(args.estimate_out, out.estimate)
    if args.trace_out:
        hn.write_trace_csv(args.trace_out, out.report)
    return 0


# --- bench ----------------------------------------------------------------------


def cmd_bench(args) -> int:
    try:
        exp = hn.load_bench_config(args.config)
    except OSError as exc:
        raise ProblemFormatError(f"cannot read {args.config}: {exc.strerror}") from None
    if args.runs is not None:
        exp.monte_carlo_runs = args.runs
    if args.seed is not None:
        exp.master_seed = args.seed
    out_dir = args.output or exp.output_dir or _default_dir(None)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    res = hn.run_bench(exp, out_dir, threads=args.threads, write_traces=not args.no_traces)
    for row in res.summary:
        print(
            f"{row['method']:<14} index={row['index'] or '-':<6} runs={row['runs']} "
            f"rms={row['rms_error'] or 'nan'} std={row['std_error'] or 'nan'} "
            f"median_time={row['median_time_sec'] or 'nan'}"
        )
    print(f"wrote {os.path.join(out_dir, 'results.csv')} and summary.csv")
    return 0


# --- phantom --------------------------------------------------------------------


def _parse_lines(text):
    if text == "all":
        return None
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a line count or 'all'") from None
    if v < 1:
        raise argparse.ArgumentTypeError("line count must be >= 1")
    return v


def cmd_phantom(args) -> int:
    spec = ScenarioSpec(family=PHANTOM, side=args.side, lines=args.lines, noise_sigma=args.sigma, seed=args.seed)
    P = generate(spec)
    method = args.method
    if method is None:
        method = "kaczmarz" if args.lines is None else "csp"
    ms = _method_spec(args, method)
    if args.lines is None and method == "kaczmarz" and args.alpha is None:
        # complete orthogonal measurements: one unrelaxed sweep is exact
        ms = hn.MethodSpec(
            name="kaczmarz",
            preset="none",
            alpha=1.0,
            max_sweeps=args.max_sweeps or 50,
            gamma=args.gamma if args.gamma is not None else 1e-12,
        )
    out = hn.run_method(P, ms, P.meta.get("s"))
    err = recovery_error(P.truth, out.estimate, P.noise_sigma)
    out_dir = _default_dir(args.output)
    os.makedirs(out_dir, exist_ok=True)
    tag = "all" if args.lines is None else str(args.lines)
    img_path = os.path.join(out_dir, f"phantom_{args.side}_{tag}_{args.seed}.pgm")
    hn.write_pgm(img_path, out.estimate.reshape(args.side, args.side))
    if args.truth_image:
        hn.write_pgm(os.path.join(out_dir, f"phantom_{args.side}_truth.pgm"), P.truth.values.reshape(args.side, args.side))
    print(
        f"method={method} side={args.side} lines={tag} sample_fraction={hn.fmt_float(P.meta['sample_fraction'])} "
        f"error={hn.fmt_float(err)} time_sec={hn.fmt_float(out.wall_time)} iterations={out.iterations} "
        f"termination={out.termination} image={img_path}"
    )
    return 0


# --- parser -----------------------------------------------------------------------


def _add_solver_args(p, method=True):
    if method:
        p.add_argument("--method", required=True, choices=hn.METHODS)
    p.add_argument("--preset", default="paper", choices=PRESETS + ("none",), help="parameter preset (default: paper)")
    p.add_argument("--alpha", type=float, help="relaxation parameter")
    p.add_argument("--lam", type=float, help="l1 step relaxation")
    p.add_argument("--epsilon", type=float, help="l1 budget")
    p.add_argument("--max-sweeps", type=int, help="sweep cap K")
    p.add_argument("--gamma", type=float, help="sweep-to-sweep step tolerance")
    p.add_argument("--block-size", type=int)
    p.add_argument("--support", type=int, help="LS / OMP support size N")
    p.add_argument("--support-factor", type=float, default=1.5, help="N = ceil(factor * s) when --support is unset")
    p.add_argument("--period", type=int, default=50, help="LS period for gauss-csp-alt, in sweeps")
    p.add_argument("--ssp-tail", type=int, default=10, help="SSP sweeps after CSP for csp-ssp")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="csfeas", description="Compressed sensing by subgradient projections.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a scenario problem file and its JSON sidecar")
    g.add_argument("family", choices=sorted(_FAMILY))
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--s", type=int)
    g.add_argument("--index", type=float, help="target recovery index (s/m) ln n")
    g.add_argument("--sigma", type=float, help="noise standard deviation")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n-freqs", type=int, help="DFT: number of sinusoids")
    g.add_argument("--embedding", default="hermitian", choices=("hermitian", "full"))
    g.add_argument("--side", type=int, help="phantom: image side")
    g.add_argument("--lines", type=_parse_lines, help="phantom: radial lines, or 'all'")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve a problem file and print one result record")
    s.add_argument("problem")
    _add_solver_args(s)
    s.add_argument("--estimate-out", help="CSV path for the estimate")
    s.add_argument("--trace-out", help="CSV path for the per-sweep trace")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a Monte Carlo campaign from a config file")
    b.add_argument("config")
    b.add_argument("-o", "--output", help=f"output directory (default: ${hn.OUTPUT_DIR_ENV} or .)")
    b.add_argument("--threads", type=int, default=1, help="maximum concurrent runs")
    b.add_argument("--runs", type=int, help="override the run count")
    b.add_argument("--seed", type=int, help="override the master seed")
    b.add_argument("--no-traces", action="store_true", help="skip per-run trace files")
    b.set_defaults(func=cmd_bench)

    ph = sub.add_parser("phantom", help="reconstruct the Shepp-Logan phantom from radial Fourier lines")
    ph.add_argument("--side", type=int, default=64)
    ph.add_argument("--lines", type=_parse_lines, default=64, help="radial lines (e.g. 32, 64) or 'all'")
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("--sigma", type=float, default=0.0)
    ph.add_argument("--method", choices=hn.METHODS, help="default: csp, or kaczmarz with --lines all")
    _add_solver_args(ph, method=False)
    ph.add_argument("-o", "--output", help=f"output directory (default: ${hn.OUTPUT_DIR_ENV} or .)")
    ph.add_argument("--truth-image", action="store_true", help="also write the ground-truth image")
    ph.set_defaults(func=cmd_phantom)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CSFeasError as exc:
        print(f"csfeas: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"csfeas: numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
