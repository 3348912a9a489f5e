"""Reproducible problem generators.

Three families are provided:

``gaussian-sparse``
    i.i.d. N(0, 1/m) sensing matrix, ``s`` nonzeros uniform on [-1, 1] at
    random positions, additive Gaussian measurement noise.
``dft-undersampled``
    A sum of sinusoids sampled at ``t_k = k``; the unknown is its unitary
    DFT, observed through ``m`` random rows of the inverse DFT.  The
    spectrum of a real series is Hermitian, so by default it is stored as
    the ``n`` real numbers ``(x_0, sqrt2 Re x_1..x_{n/2-1}, x_{n/2},
    sqrt2 Im x_1..x_{n/2-1})``.  That map is an isometry and the sensing
    rows are rows of an orthonormal real Fourier basis.  ``embedding="full"``
    instead keeps ``(Re x, Im x)`` in ``R^{2n}`` with rows
    ``[Re F*_j, -Im F*_j]``; there the columns of ``k`` and ``n - k``
    coincide up to sign, which defeats greedy methods.
``phantom-radial``
    The Shepp-Logan head phantom observed through 2-D unitary DFT samples
    on radial lines.  Conjugate-symmetric duplicates are dropped; each kept
    frequency contributes its real part and, unless it is self-conjugate,
    its imaginary part.

All draws come from :func:`csfeas.rng.make_rng` seeded by ``spec.seed``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import UsageError
from .metrics import recovery_index
from .model import COMPRESSIBLE, SPARSE, DenseMatrix, Problem, Signal
from .rng import make_rng

__all__ = [
    "GAUSSIAN",
    "DFT",
    "PHANTOM",
    "FAMILIES",
    "ScenarioSpec",
    "CompressibleModel",
    "recovery_index_to_s",
    "effective_sparseness",
    "gen_gaussian_sparse",
    "gen_dft_undersampled",
    "gen_phantom_radial",
    "gen_compressible",
    "generate",
    "embed_complex",
    "unembed_complex",
    "embed_hermitian",
    "unembed_hermitian",
    "shepp_logan",
    "radial_mask",
    "PHANTOM_SIDES",
]

GAUSSIAN = "gaussian-sparse"
DFT = "dft-undersampled"
PHANTOM = "phantom-radial"
FAMILIES = (GAUSSIAN, DFT, PHANTOM)
PHANTOM_SIDES = (32, 64, 128)

EFFECTIVE_FRACTION = 0.05
FREQ_LOW, FREQ_HIGH = 1.0, 10.0 * math.pi


@dataclass(frozen=True)
class ScenarioSpec:
    """Geometry, sparseness target, noise and seed of one scenario.

    Sparseness is given either as ``s`` or as a target recovery ``index``.
    For the DFT family ``n`` is the series length (the real unknown has
    length ``n``, or ``2n`` with ``embedding="full"``) and ``n_freqs`` may
    replace ``index``; ``freqs`` pins the angular frequencies outright.
    With a target index, frequency sets are redrawn until the effective
    index lies within ``index_tolerance`` (relative) of it.  The phantom
    family takes ``side`` and ``lines``; ``n`` is ``side**2`` and
    ``m`` follows from the mask.
    """

    family: str = GAUSSIAN
    m: Optional[int] = None
    n: Optional[int] = None
    s: Optional[int] = None
    index: Optional[float] = None
    noise_sigma: float = 0.01
    seed: int = 0
    n_freqs: Optional[int] = None
    max_freqs: int = 64
    index_tolerance: float = 0.25
    side: Optional[int] = None
    lines: Optional[int] = None
    phantom: str = "modified"
    embedding: str = "hermitian"
    freqs: Optional[tuple] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown scenario family {self.family!r}")
        if self.embedding not in ("hermitian", "full"):
            raise UsageError(f"unknown DFT embedding {self.embedding!r}")
        if not self.noise_sigma >= 0:
            raise UsageError("noise_sigma must be >= 0")
        if self.family == PHANTOM:
            if self.side not in PHANTOM_SIDES:
                raise UsageError(f"phantom side must be one of {PHANTOM_SIDES}, got {self.side}")
            if self.lines is not None and self.lines < 1:
                raise UsageError("line count must be >= 1")
            if self.n is not None and self.n != self.side**2:
                raise UsageError(f"phantom needs n = side^2 = {self.side ** 2}, got {self.n}")
        else:
            if self.m is None or self.n is None or self.m < 1 or self.n < 1:
                raise UsageError("m and n must be positive")

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return replace(self, seed=int(seed))

    def resolved_s(self) -> int:
        if self.s is not None:
            if not 0 <= self.s < self.n:
                raise UsageError(f"sparseness s={self.s} must satisfy 0 <= s < n={self.n}")
            return int(self.s)
        if self.index is None:
            raise UsageError("either s or index must be given")
        return recovery_index_to_s(self.index, self.m, self.n)


@dataclass(frozen=True)
class CompressibleModel:
    """Power-law magnitudes ``kappa * i**(-1/r)``."""

    kappa: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        if not (self.kappa > 0 and self.r > 0):
            raise UsageError("kappa and r must be > 0")

    def magnitudes(self, n: int) -> np.ndarray:
        return self.kappa * np.arange(1, n + 1, dtype=np.float64) ** (-1.0 / self.r)


def recovery_index_to_s(index: float, m: int, n: int) -> int:
    """Sparseness whose recovery index ``(s/m) ln n`` is closest to
    ``index``, at least 1."""
    if not index > 0:
        raise UsageError(f"recovery index must be > 0, got {index}")
    s = max(1, int(math.floor(index * m / math.log(n) + 0.5)))
    if s >= n:
        raise UsageError(f"recovery index {index} gives s={s} >= n={n}")
    return s


def effective_sparseness(x, fraction: float = EFFECTIVE_FRACTION) -> int:
    """``n - card{i : |x_i| <= fraction * max|x|}``; 0 for the zero vector."""
    a = np.abs(np.asarray(x))
    if a.size == 0:
        raise UsageError("empty vector")
    if not 0 < fraction < 1:
        raise UsageError("fraction must lie in (0, 1)")
    top = float(a.max())
    if top == 0.0:
        return 0
    return int(a.size - np.count_nonzero(a <= fraction * top))


def _quiet_problem(*args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Problem(*args, **kwargs)


# --- gaussian sparse --------------------------------------------------------------


def gen_gaussian_sparse(spec: ScenarioSpec) -> Problem:
    m, n = spec.m, spec.n
    s = spec.resolved_s()
    rng = make_rng(spec.seed)
    H = rng.standard_normal((m, n)) / math.sqrt(m)
    support = rng.choice(n, size=s, replace=False)
    vals = rng.uniform(-1.0, 1.0, size=s)
    while np.any(vals == 0.0):
        zero = vals == 0.0
        vals[zero] = rng.uniform(-1.0, 1.0, size=int(zero.sum()))
    x = np.zeros(n)
    x[support] = vals
    y = H @ x
    if spec.noise_sigma > 0:
        y = y + spec.noise_sigma * rng.standard_normal(m)
    meta = {"family": GAUSSIAN, "seed": int(spec.seed), "s": s, "index": recovery_index(s, m, n)}
    return _quiet_problem(DenseMatrix(H), y, Signal(x, SPARSE), spec.noise_sigma, meta=meta)


# --- undersampled DFT -------------------------------------------------------------


def embed_complex(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    return np.concatenate([z.real, z.imag])


def unembed_complex(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size % 2:
        raise UsageError("embedded vector must have even length")
    h = v.size // 2
    return v[:h] + 1j * v[h:]


def embed_hermitian(z) -> np.ndarray:
    """Isometric real coordinates of a Hermitian spectrum of even length."""
    z = np.asarray(z, dtype=np.complex128)
    n = z.size
    if n % 2:
        raise UsageError("Hermitian embedding needs an even length")
    h = n // 2
    r2 = math.sqrt(2.0)
    return np.concatenate(
        [[z[0].real], r2 * z[1:h].real, [z[h].real], r2 * z[1:h].imag]
    )


def unembed_hermitian(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = v.size
    if n % 2:
        raise UsageError("Hermitian embedding needs an even length")
    h = n // 2
    half = (v[1:h] + 1j * v[h + 1 :]) / math.sqrt(2.0)
    z = np.empty(n, dtype=np.complex128)
    z[0] = v[0]
    z[h] = v[h]
    z[1:h] = half
    z[h + 1 :] = np.conj(half[::-1])
    return z


def _hermitian_rows(rows, n):
    h = n // 2
    scale = 1.0 / math.sqrt(n)
    k = np.arange(1, h)
    theta = 2.0 * math.pi * np.outer(rows, k) / n
    r2 = math.sqrt(2.0)
    return np.hstack(
        [
            np.full((rows.size, 1), scale),
            r2 * scale * np.cos(theta),
            (scale * np.where(rows % 2 == 0, 1.0, -1.0))[:, None],
            -r2 * scale * np.sin(theta),
        ]
    )


def _sinusoids(freqs, n):
    t = np.arange(1, n + 1, dtype=np.float64)
    return np.sin(np.outer(freqs, t)).sum(axis=0)


def _dft_index(x, m, n):
    return recovery_index(effective_sparseness(np.abs(x)), m, n)


def gen_dft_undersampled(spec: ScenarioSpec) -> Problem:
    m, n = spec.m, spec.n
    if m > n:
        raise UsageError(f"m={m} must not exceed n={n}")
    if spec.embedding == "hermitian" and n % 2:
        raise UsageError("the Hermitian embedding needs an even n")
    rng = make_rng(spec.seed)
    if spec.freqs is not None:
        pool = np.asarray(spec.freqs, dtype=np.float64)
        n_f = pool.size
        if n_f < 1:
            raise UsageError("freqs must not be empty")
    elif spec.n_freqs is not None:
        if spec.n_freqs < 1:
            raise UsageError("n_freqs must be >= 1")
        pool = rng.uniform(FREQ_LOW, FREQ_HIGH, size=spec.n_freqs)
        n_f = spec.n_freqs
    elif spec.index is not None:
        pool = _draw_for_index(rng, m, n, spec.index, spec.index_tolerance, spec.max_freqs)
        n_f = pool.size
    else:
        raise UsageError("dft scenario needs n_freqs or a target index")
    rows = np.sort(rng.choice(n, size=m, replace=False))

    series = _sinusoids(pool[:n_f], n)
    x = np.fft.fft(series, norm="ortho")
    if spec.embedding == "hermitian":
        H = _hermitian_rows(rows, n)
        truth = embed_hermitian(x)
    else:
        phase = 2.0 * math.pi * np.outer(rows, np.arange(n)) / n
        scale = 1.0 / math.sqrt(n)
        H = np.hstack([np.cos(phase) * scale, -np.sin(phase) * scale])
        truth = embed_complex(x)
    y = series[rows]
    if spec.noise_sigma > 0:
        y = y + spec.noise_sigma * rng.standard_normal(m)
    s_hat = effective_sparseness(np.abs(x))
    meta = {
        "family": DFT,
        "seed": int(spec.seed),
        "n_freqs": int(n_f),
        "embedding": spec.embedding,
        "freqs": pool[:n_f].tolist(),
        "rows": rows.tolist(),
        "s_hat": s_hat,
        "s": effective_sparseness(truth),
        "index": recovery_index(s_hat, m, n),
    }
    return _quiet_problem(DenseMatrix(H), y, Signal(truth, COMPRESSIBLE), spec.noise_sigma, meta=meta)


def _draw_for_index(rng, m, n, target, tol, max_freqs, attempts=500):
    """Draw frequencies one at a time until the effective index reaches
    ``target * (1 - tol)``; accept if it is also below ``target * (1 + tol)``,
    otherwise start over with fresh draws."""
    lo, hi = target * (1.0 - tol), target * (1.0 + tol)
    for _ in range(attempts):
        freqs = []
        while len(freqs) < max_freqs:
            freqs.append(rng.uniform(FREQ_LOW, FREQ_HIGH))
            idx = _dft_index(np.fft.fft(_sinusoids(freqs, n), norm="ortho"), m, n)
            if idx >= lo:
                break
        if lo <= idx <= hi:
            return np.array(freqs)
    raise UsageError(f"could not reach effective index {target} within {attempts} attempts")


# --- radial phantom ---------------------------------------------------------------

# (intensity, semi-axis a, semi-axis b, x0, y0, angle in degrees)
_SHEPP_LOGAN_GEOMETRY = [
    (0.69, 0.92, 0.0, 0.0, 0.0),
    (0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (0.1100, 0.3100, 0.22, 0.0, -18.0),
    (0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.0230, 0.0460, 0.06, -0.605, 0.0),
]
_INTENSITIES = {
    "modified": (1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1),
    "original": (2.0, -0.98, -0.02, -0.02, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01),
}


def shepp_logan(side: int, variant: str = "modified") -> np.ndarray:
    """Shepp-Logan phantom rasterised at pixel centres on [-1, 1]^2.

    Row 0 is the top of the image (y = +1).  ``variant="modified"`` uses
    the higher-contrast intensities common in imaging toolboxes.
    """
    if variant not in _INTENSITIES:
        raise UsageError(f"unknown phantom variant {variant!r}")
    ax = (np.arange(side) - (side - 1) / 2.0) / ((side - 1) / 2.0)
    X, Y = np.meshgrid(ax, ax[::-1])
    img = np.zeros((side, side))
    for A, (a, b, x0, y0, deg) in zip(_INTENSITIES[variant], _SHEPP_LOGAN_GEOMETRY):
        phi = math.radians(deg)
        c, s = math.cos(phi), math.sin(phi)
        u = (X - x0) * c + (Y - y0) * s
        v = -(X - x0) * s + (Y - y0) * c
        img[(u / a) ** 2 + (v / b) ** 2 <= 1.0] += A
    return img


def radial_mask(side: int, lines: Optional[int], offset: float = 0.0) -> np.ndarray:
    """Boolean ``(side, side)`` mask in unshifted FFT index order.

    Each line passes through the zero frequency at angle
    ``offset + pi * l / lines``; points are taken every half sample along
    the line out to the grid corners and snapped to the nearest frequency.
    ``lines=None`` selects every frequency.
    """
    mask = np.zeros((side, side), dtype=bool)
    if lines is None:
        mask[:] = True
        return mask
    half = side // 2
    radius = np.arange(-side, side + 0.25, 0.5) * (math.sqrt(2.0) / 2.0)
    for l in range(lines):
        theta = offset + math.pi * l / lines
        u = np.rint(radius * math.cos(theta)).astype(int)
        v = np.rint(radius * math.sin(theta)).astype(int)
        ok = (u >= -half) & (u < side - half) & (v >= -half) & (v < side - half)
        mask[u[ok] % side, v[ok] % side] = True
    return mask


def _phantom_rows(side, mask):
    """Canonical frequencies of ``mask`` and the matching real DFT rows."""
    ku, kv = np.nonzero(mask)
    lin = ku * side + kv
    conj = ((-ku) % side) * side + ((-kv) % side)
    keep = lin <= conj
    # a frequency whose conjugate is outside the mask is kept as well
    in_mask = mask.ravel()[conj]
    keep |= ~in_mask
    ku, kv, lin, conj = ku[keep], kv[keep], lin[keep], conj[keep]
    self_conj = lin == conj

    r = np.arange(side)
    pix_r = np.repeat(r, side).astype(np.float64)
    pix_c = np.tile(r, side).astype(np.float64)
    phase = 2.0 * math.pi * (np.outer(ku, pix_r) + np.outer(kv, pix_c)) / side
    re = np.cos(phase) / side
    im = -np.sin(phase) / side

    blocks, index = [], []
    for i in range(ku.size):
        blocks.append(re[i])
        index.append((int(ku[i]), int(kv[i]), "re"))
        if not self_conj[i]:
            blocks.append(im[i])
            index.append((int(ku[i]), int(kv[i]), "im"))
    return np.vstack(blocks), index


def gen_phantom_radial(spec: ScenarioSpec) -> Problem:
    side = spec.side
    rng = make_rng(spec.seed)
    lines = spec.lines
    offset = 0.0
    if lines is not None:
        offset = float(rng.uniform(0.0, math.pi / lines))
    mask = radial_mask(side, lines, offset)
    img = shepp_logan(side, spec.phantom)
    H, index = _phantom_rows(side, mask)
    X = np.fft.fft2(img, norm="ortho")
    y = np.array([X[u, v].real if part == "re" else X[u, v].imag for u, v, part in index])
    if spec.noise_sigma > 0:
        y = y + spec.noise_sigma * rng.standard_normal(y.size)
    truth = img.ravel()
    meta = {
        "family": PHANTOM,
        "seed": int(spec.seed),
        "side": side,
        "lines": lines,
        "offset": offset,
        "sample_fraction": float(mask.mean()),
        "s": effective_sparseness(truth),
        "index": recovery_index(effective_sparseness(truth), H.shape[0], side * side),
    }
    return _quiet_problem(DenseMatrix(H), y, Signal(truth, COMPRESSIBLE), spec.noise_sigma, meta=meta)


# --- compressible signals ---------------------------------------------------------


def gen_compressible(model: CompressibleModel, n: int, seed) -> Signal:
    """Power-law magnitudes with random signs at random positions."""
    if n < 1:
        raise UsageError("n must be >= 1")
    rng = make_rng(seed)
    mags = model.magnitudes(n)
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    x = np.empty(n)
    x[rng.permutation(n)] = mags * signs
    return Signal(x, COMPRESSIBLE)


def generate(spec: ScenarioSpec) -> Problem:
    if spec.family == GAUSSIAN:
        return gen_gaussian_sparse(spec)
    if spec.family == DFT:
        return gen_dft_undersampled(spec)
    return gen_phantom_radial(spec)
