"""Acceptance suite: one test per criterion, at full tolerance.

Each test records a PASS/FAIL line that is printed in the terminal summary.
The Monte Carlo criteria take minutes; the phantom criterion dominates.
"""

import itertools
import math
import statistics

import numpy as np
import pytest

from csfeas import (
    HyperplaneConstraint,
    L1BallConstraint,
    RefinePolicy,
    ScenarioSpec,
    SolverConfig,
    csp_cs,
    csp_generic,
    kaczmarz,
    l1_subgradient,
    recovery_error,
)
from csfeas.baselines import OmpConfig, omp
from csfeas.harness import ExperimentSpec, MethodSpec, run_bench, run_method
from csfeas.presets import paper_config
from csfeas.refine import GAUSS_ALTERNATING, GAUSS_FINAL, gauss_csp, gauss_csp_alternating
from csfeas.rng import run_seed
from csfeas.scenarios import DFT, GAUSSIAN, PHANTOM, generate

from conftest import make_problem

pytestmark = pytest.mark.acceptance


def _summary(res, method, index):
    (row,) = [r for r in res.summary if r["method"] == method and r["index"] == index]
    assert row["failures"] == 0
    return row


def _rms(res, method, index):
    return float(_summary(res, method, index)["rms_error"])


@pytest.fixture(scope="module")
def table1():
    exp = ExperimentSpec(
        ScenarioSpec(GAUSSIAN, m=512, n=1024, noise_sigma=0.01),
        [MethodSpec("csp"), MethodSpec("gauss-csp"), MethodSpec("omp"), MethodSpec("omp-ls")],
        [0.1, 0.6],
        monte_carlo_runs=25,
        master_seed=2024,
    )
    return run_bench(exp, None)


def test_c01_table1_small_scale(table1, criterion):
    g1, g6 = _rms(table1, "gauss-csp", "0.1"), _rms(table1, "gauss-csp", "0.6")
    c1, c6 = _rms(table1, "csp", "0.1"), _rms(table1, "csp", "0.6")
    ok = 1.3 <= g1 <= 3.5 and 1.3 <= g6 <= 3.5 and c1 > g1 and c6 > g6
    criterion(1, ok, f"gauss-csp rms {g1:.3f} @0.1, {g6:.3f} @0.6 in [1.3, 3.5]; csp {c1:.3f}, {c6:.3f} larger")


def test_c02_ls_augmentation_pattern(table1, criterion):
    o, ol = _rms(table1, "omp", "0.1"), _rms(table1, "omp-ls", "0.1")
    c, g = _rms(table1, "csp", "0.1"), _rms(table1, "gauss-csp", "0.1")
    ok = abs(o - ol) < 0.5 and c - g > 2.0
    criterion(2, ok, f"|omp - omp-ls| = {abs(o - ol):.3f} < 0.5; csp - gauss-csp = {c - g:.3f} > 2.0")


def test_c03_runtime_flat_in_sparseness(criterion):
    exp = ExperimentSpec(
        ScenarioSpec(GAUSSIAN, m=1024, n=2048, noise_sigma=0.01),
        [MethodSpec("csp"), MethodSpec("omp")],
        [0.1, 0.6],
        monte_carlo_runs=10,
        master_seed=7,
    )
    res = run_bench(exp, None)
    t = {(m, i): float(_summary(res, m, i)["median_time_sec"]) for m in ("csp", "omp") for i in ("0.1", "0.6")}
    sweeps = {i: float(_summary(res, "csp", i)["mean_iterations"]) for i in ("0.1", "0.6")}
    csp_ratio = t["csp", "0.6"] / t["csp", "0.1"]
    omp_ratio = t["omp", "0.6"] / t["omp", "0.1"]
    ok = csp_ratio <= 1.5 and omp_ratio >= 3.0
    criterion(
        3,
        ok,
        f"median time ratio 0.6/0.1: csp {csp_ratio:.2f} (<= 1.5, mean sweeps {sweeps['0.1']:.1f} vs {sweeps['0.6']:.1f}), "
        f"omp {omp_ratio:.2f} (>= 3)",
    )


def test_c04_dft(criterion):
    exp = ExperimentSpec(
        ScenarioSpec(DFT, m=512, n=1024, noise_sigma=0.0),
        [MethodSpec("csp"), MethodSpec("omp")],
        [0.2],
        monte_carlo_runs=25,
        master_seed=31,
    )
    res = run_bench(exp, None)
    c, o = _rms(res, "csp", "0.2"), _rms(res, "omp", "0.2")
    criterion(4, c <= 0.25 and o <= 0.30, f"dft normalized rms: csp {c:.4f} <= 0.25, omp {o:.4f} <= 0.30")


def test_c05_kaczmarz_min_norm(criterion):
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(2, 21))
        n = int(rng.integers(2 * m, 41)) if 2 * m <= 40 else 40
        H = rng.standard_normal((m, n))
        y = H @ rng.standard_normal(n)
        P = make_problem(H, y)
        r = kaczmarz(P, SolverConfig(alpha=1.0, max_iterations=200000, step_tolerance=1e-15))
        # independent oracle: x = H^T (H H^T)^{-1} y
        oracle = H.T @ np.linalg.solve(H @ H.T, y)
        worst = max(worst, np.linalg.norm(r.estimate - oracle) / np.linalg.norm(oracle))
    criterion(5, worst <= 1e-6, f"max relative deviation from min-norm oracle {worst:.2e} <= 1e-6 over 50 systems")


def test_c06_fejer_monotone(criterion):
    rng = np.random.default_rng(606)
    worst = -np.inf
    for _ in range(100):
        m = int(rng.integers(1, 51))
        n = int(rng.integers(m + 1, 101))
        H = rng.standard_normal((m, n))
        q = rng.standard_normal(n) * (rng.random(n) < 0.3)
        y = H @ q
        cons = [HyperplaneConstraint(H[i], y[i]) for i in range(m)]
        cons.append(L1BallConstraint(np.abs(q).sum() * (1 + rng.random()), n))
        z0 = rng.standard_normal(n) * 3
        for alpha in (0.5, 1.0, 1.8):
            d = [np.linalg.norm(z0 - q)]
            csp_generic(cons, z0, SolverConfig(alpha=alpha, max_iterations=15), on_step=lambda k, z: d.append(np.linalg.norm(z - q)))
            worst = max(worst, float(np.max(np.diff(d))))
    criterion(6, worst <= 1e-10, f"max distance increase per step {worst:.2e} <= 1e-10 (100 CFPs x 3 alphas)")


def test_c07_subgradient_validity(criterion):
    rng = np.random.default_rng(707)
    worst = -np.inf
    for n in (2, 10, 100):
        for _ in range(1000):
            z = rng.standard_normal(n) * rng.choice([1e-3, 1.0, 1e3])
            z0 = rng.standard_normal(n)
            z0[rng.random(n) < 0.2] = 0.0  # exercise sign(0) = +1
            t = l1_subgradient(z0)
            gap = t @ (z - z0) - (np.abs(z).sum() - np.abs(z0).sum())
            worst = max(worst, gap)
    criterion(7, worst <= 1e-9, f"max subgradient inequality violation {worst:.2e} <= 1e-9 (3000 pairs)")


def _best_subset(H, y, k):
    combos = np.array(list(itertools.combinations(range(H.shape[1]), k)))
    A = H[:, combos].transpose(1, 0, 2)  # (subsets, m, k)
    G = A.transpose(0, 2, 1) @ A
    b = A.transpose(0, 2, 1) @ y
    beta = np.linalg.solve(G, b[..., None])[..., 0]
    res = np.linalg.norm(y[None, :] - (A @ beta[..., None])[..., 0], axis=1)
    return set(combos[int(np.argmin(res))])


def test_c08_omp_brute_force(criterion):
    hits = 0
    for seed in range(50):
        P = generate(ScenarioSpec(GAUSSIAN, m=16, n=32, s=3, noise_sigma=0.0, seed=run_seed(8, seed)))
        xh = omp(P, OmpConfig(3))
        hits += set(np.flatnonzero(xh)) == _best_subset(P.matrix.array, P.y, 3)
    criterion(8, hits >= 45, f"omp support equals exhaustive best subset in {hits}/50 seeds (>= 45)")


def test_c09_block_invariance(criterion):
    identical = 0
    for seed in range(20):
        P = generate(ScenarioSpec(GAUSSIAN, m=96, n=192, index=0.3, seed=run_seed(9, seed)))
        cfg = paper_config(P.n, max_iterations=200)
        outs = [csp_cs(P, cfg.replace(block_size=b)).estimate for b in (1, 4, 32)]
        identical += all(np.array_equal(outs[0], o) for o in outs[1:])
    criterion(9, identical == 20, f"bit-identical estimates for block sizes 1, 4, 32 on {identical}/20 problems")


def _sweeps_to_floor(errors):
    floor = errors[-1]
    return next(k for k, e in enumerate(errors, start=1) if e <= 1.05 * floor)


def test_c10_alternating_converges_faster(criterion):
    wins, pairs = 0, []
    for seed in range(10):
        P = generate(ScenarioSpec(GAUSSIAN, m=1024, n=2048, index=0.3, seed=run_seed(10, seed)))
        cfg = paper_config(P.n)
        err = lambda k, x: recovery_error(P.truth, x, P.noise_sigma)
        g = gauss_csp(P, cfg, RefinePolicy(GAUSS_FINAL), monitor=err)
        a = gauss_csp_alternating(P, cfg, RefinePolicy(GAUSS_ALTERNATING, alternation_period=1), monitor=err)
        kg, ka = _sweeps_to_floor(g.monitor), _sweeps_to_floor(a.monitor)
        pairs.append((ka, kg))
        wins += ka <= kg
    criterion(10, wins >= 8, f"alternating reaches its floor no later in {wins}/10 seeds (>= 8); (alt, final) sweeps {pairs}")


def test_c11_phantom(criterion):
    full = generate(ScenarioSpec(PHANTOM, side=64, lines=None, noise_sigma=0.0, seed=0))
    rk = run_method(full, MethodSpec("kaczmarz", preset="none", alpha=1.0, max_sweeps=50, gamma=1e-12))
    e_full = recovery_error(full.truth, rk.estimate, 0.0)
    e = {}
    for lines in (64, 32):
        e[lines] = []
        for seed in range(5):
            P = generate(ScenarioSpec(PHANTOM, side=64, lines=lines, noise_sigma=0.0, seed=seed))
            out = run_method(P, MethodSpec("csp", preset="paper"))
            e[lines].append(recovery_error(P.truth, out.estimate, 0.0))
    m64, m32 = statistics.mean(e[64]), statistics.mean(e[32])
    ok = e_full <= 1e-6 and max(e[64]) <= 0.35 and m32 >= m64
    criterion(
        11,
        ok,
        f"full data {e_full:.1e} <= 1e-6; 64 lines max {max(e[64]):.3f} <= 0.35; "
        f"mean error 32 lines {m32:.3f} >= 64 lines {m64:.3f}",
    )


CAMPAIGN = """\
scenario = {scenario}
m = 64
n = 128
{cells}
runs = 3
seed = 1234

[method]
name = csp
max_sweeps = 100
[method]
name = gauss-csp
max_sweeps = 100
[method]
name = gauss-csp-alt
max_sweeps = 100
period = 5
[method]
name = csp-ssp
max_sweeps = 100
[method]
name = ssp
max_sweeps = 50
[method]
name = kaczmarz
max_sweeps = 50
[method]
name = omp
[method]
name = omp-ls
"""


def _strip_time(path):
    lines = path.read_text().splitlines()
    col = lines[0].split(",").index("time_sec")
    return [",".join(v for i, v in enumerate(l.split(",")) if i != col) for l in lines]


def test_c12_bench_determinism(tmp_path, criterion):
    from csfeas.cli import main

    ok = True
    for scenario, cells in (("gaussian", "indices = 0.1, 0.6"), ("dft", "indices = 0.2")):
        cfg = tmp_path / f"{scenario}.cfg"
        cfg.write_text(CAMPAIGN.format(scenario=scenario, cells=cells))
        assert main(["bench", str(cfg), "-o", str(tmp_path / f"{scenario}1"), "--no-traces"]) == 0
        assert main(["bench", str(cfg), "-o", str(tmp_path / f"{scenario}2"), "--threads", "3", "--no-traces"]) == 0
        a = _strip_time(tmp_path / f"{scenario}1" / "results.csv")
        b = _strip_time(tmp_path / f"{scenario}2" / "results.csv")
        ok &= a == b and len(a) > 1
    criterion(12, ok, "results.csv identical apart from time_sec across reruns (1 vs 3 threads, gaussian and dft)")
