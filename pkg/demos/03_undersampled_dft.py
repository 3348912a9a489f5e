"""
Spectrum of a sum of sinusoids from a subset of time samples
============================================================

The unknown is the DFT of a real series, written in real coordinates that
keep the Euclidean norm (the spectrum is Hermitian, so half of it carries
all the information).  Only m of the n time samples are observed.
"""

import numpy as np

from csfeas import ScenarioSpec, csp_cs, generate, recovery_error
from csfeas.baselines import OmpConfig, omp
from csfeas.presets import paper_config
from csfeas.refine import default_support
from csfeas.scenarios import DFT, unembed_hermitian

P = generate(ScenarioSpec(family=DFT, m=512, n=1024, index=0.2, noise_sigma=0.0, seed=5))
print(f"{P.meta['n_freqs']} sinusoids, effective index {P.meta['index']:.3f}")

r = csp_cs(P, paper_config(P.n))
x_omp = omp(P, OmpConfig(default_support(P.meta["s"])))
print(f"csp normalized error {recovery_error(P.truth, r.estimate, 0.0):.4f} after {r.sweeps_run} sweeps")
print(f"omp normalized error {recovery_error(P.truth, x_omp, 0.0):.4f}")

# back to the time domain: the full series, including unobserved samples
series = np.fft.ifft(unembed_hermitian(r.estimate), norm="ortho").real
truth = np.fft.ifft(unembed_hermitian(P.truth.values), norm="ortho").real
hidden = np.setdiff1d(np.arange(P.n), P.meta["rows"])
print("rms error on unobserved samples:", np.sqrt(np.mean((series - truth)[hidden] ** 2)))
