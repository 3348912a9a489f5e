"""
Convergence traces: Gauss-CSP, its alternating variant, and Kaczmarz
=====================================================================

Every solver keeps a per-sweep trace of the residual, the l1 norm and the
step size; a ``monitor`` callback can add anything else, here the recovery
error of the current estimate.
"""

import numpy as np

from csfeas import DenseMatrix, Problem, RefinePolicy, ScenarioSpec, SolverConfig, generate, kaczmarz, recovery_error
from csfeas.presets import paper_config
from csfeas.refine import GAUSS_ALTERNATING, GAUSS_FINAL, gauss_csp, gauss_csp_alternating

P = generate(ScenarioSpec(m=1024, n=2048, index=0.3, noise_sigma=0.01, seed=3))
cfg = paper_config(P.n)
err = lambda k, x: recovery_error(P.truth, x, P.noise_sigma)

final = gauss_csp(P, cfg, RefinePolicy(GAUSS_FINAL), monitor=err)
alt = gauss_csp_alternating(P, cfg, RefinePolicy(GAUSS_ALTERNATING, alternation_period=1), monitor=err)

print("sweep  gauss-csp  alternating")
for k in range(max(final.sweeps_run, alt.sweeps_run)):
    a = f"{final.monitor[k]:9.3f}" if k < final.sweeps_run else " " * 9
    b = f"{alt.monitor[k]:9.3f}" if k < alt.sweeps_run else ""
    print(f"{k + 1:5d}  {a}  {b}")

# Kaczmarz from zero stays in the row space of H, so on a consistent system
# it converges to the minimum-norm solution
rng = np.random.default_rng(0)
H = rng.standard_normal((30, 60))
Q = Problem(DenseMatrix(H), H @ rng.standard_normal(60))
r = kaczmarz(Q, SolverConfig(alpha=1.0, max_iterations=20000, step_tolerance=1e-14))
print("distance to pinv solution:", np.linalg.norm(r.estimate - np.linalg.pinv(H) @ Q.y))
print("trace columns (sweep, residual, l1, step):", r.trace_array()[-1].round(12))
