"""
Sparse recovery from Gaussian measurements
==========================================

A 512 x 1024 Gaussian sensing matrix, a sparse signal and noisy
measurements.  Plain CSP finds a point that is consistent with the data and
has a small l1 norm, but it spreads a little energy over many coordinates
off the true support.  A least-squares refit on the largest entries
(Gauss-CSP) zeroes that spread.  OMP is the greedy reference.
"""

import math

import numpy as np

from csfeas import ScenarioSpec, csp_cs, generate, ls_refine, recovery_error
from csfeas.baselines import OmpConfig, omp
from csfeas.presets import paper_config

# a recovery index of 0.1 means s = 0.1 * m / ln(n), here 7 nonzeros
P = generate(ScenarioSpec(m=512, n=1024, index=0.1, noise_sigma=0.01, seed=7))
s = P.meta["s"]
print(f"m={P.m} n={P.n} s={s} index={P.meta['index']:.4f}")

# the tuned schedule: alpha = 1.8, a tiny l1 budget and a decaying lambda
cfg = paper_config(P.n)
report = csp_cs(P, cfg)
print(f"CSP ran {report.sweeps_run} sweeps, stopped on {report.termination}")

N = math.ceil(1.5 * s)
x_csp = report.estimate
x_gauss = ls_refine(P, x_csp, N)
x_omp = omp(P, OmpConfig(N))

for name, xh in [("csp", x_csp), ("gauss-csp", x_gauss), ("omp", x_omp)]:
    print(f"{name:10s} ideal error {recovery_error(P.truth, xh, P.noise_sigma):7.3f}")

# on the true support both estimates are close; the difference is off it
supp = P.truth.support
off = np.setdiff1d(np.arange(P.n), supp)
print(np.c_[P.truth.values[supp], x_csp[supp], x_gauss[supp]].round(3))
print(f"energy off the support: csp {np.sum(x_csp[off] ** 2):.4f}, gauss-csp {np.sum(x_gauss[off] ** 2):.4f}")
