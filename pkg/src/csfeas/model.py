"""Problem representation: dense row-major sensing matrices, signals and
recovery instances, plus the plain-text problem file format.

File layout (UTF-8)::

    CSPROB v1 <m> <n> <sigma> [compressible]
    y: <m decimals>
    <n decimals>            # one line per matrix row, m lines
    x: <n decimals>         # optional ground truth

Decimals are written with 17 significant digits so finite float64 values
survive a round trip unchanged.  The optional trailing ``compressible``
header token tags the ground truth kind; without it the truth is sparse.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ProblemFormatError, UsageError

__all__ = [
    "DenseMatrix",
    "Signal",
    "Problem",
    "SPARSE",
    "COMPRESSIBLE",
    "row_dot",
    "residual",
    "save_problem",
    "load_problem",
]

SPARSE = "sparse"
COMPRESSIBLE = "compressible"
_KINDS = (SPARSE, COMPRESSIBLE)

_MAGIC = "CSPROB"
_VERSION = "v1"


def _frozen(a):
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    a.setflags(write=False)
    return a


class DenseMatrix:
    """Immutable dense real matrix stored row-major with cached squared
    row norms.

    Parameters
    ----------
    entries : array_like, shape (m, n)
        Matrix entries; copied into a C-contiguous float64 buffer.
    """

    __slots__ = ("_a", "_row_norms_sq")

    def __init__(self, entries):
        a = np.asarray(entries, dtype=np.float64)
        if a.ndim != 2:
            raise UsageError(f"matrix must be 2-D, got shape {a.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise UsageError(f"matrix needs m >= 1 and n >= 1, got {a.shape}")
        self._a = _frozen(a)
        self._row_norms_sq = _frozen(np.einsum("ij,ij->i", self._a, self._a))

    @classmethod
    def from_rows(cls, m, n, flat):
        """Build from a flat row-major buffer of length ``m * n``."""
        flat = np.asarray(flat, dtype=np.float64).ravel()
        if flat.size != m * n:
            raise UsageError(f"entry buffer has {flat.size} values, expected {m}*{n}")
        return cls(flat.reshape(m, n))

    @property
    def m(self) -> int:
        return self._a.shape[0]

    @property
    def n(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self):
        return self._a.shape

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._a

    @property
    def row_norms_sq(self) -> np.ndarray:
        return self._row_norms_sq

    def row(self, i: int) -> np.ndarray:
        return self._a[i]

    def column(self, j: int) -> np.ndarray:
        return self._a[:, j]

    def with_row(self, i: int, values) -> "DenseMatrix":
        """Copy of the matrix with row ``i`` replaced; norms are recomputed."""
        a = self._a.copy()
        a[i] = values
        return DenseMatrix(a)

    def matvec(self, z) -> np.ndarray:
        return self._a @ z

    def rmatvec(self, r) -> np.ndarray:
        return self._a.T @ r

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._a, other._a)

    def __repr__(self):
        return f"DenseMatrix(m={self.m}, n={self.n})"


@dataclass(frozen=True, eq=False)
class Signal:
    """A real signal with its kind tag (``"sparse"`` or ``"compressible"``)."""

    values: np.ndarray
    kind: str = SPARSE

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UsageError(f"unknown signal kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise UsageError("signal values must be a vector")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self):
        return self.values.size

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    @property
    def l0(self) -> int:
        return int(np.count_nonzero(self.values))

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class Problem:
    """One recovery instance ``y = H x + noise``."""

    matrix: DenseMatrix
    y: np.ndarray
    truth: Optional[Signal] = None
    noise_sigma: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not isinstance(self.matrix, DenseMatrix):
            object.__setattr__(self, "matrix", DenseMatrix(self.matrix))
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim != 1 or y.size != self.matrix.m:
            raise UsageError(f"y has length {y.size}, expected m={self.matrix.m}")
        object.__setattr__(self, "y", _frozen(y))
        if self.truth is not None:
            truth = self.truth
            if not isinstance(truth, Signal):
                truth = Signal(truth)
                object.__setattr__(self, "truth", truth)
            if len(truth) != self.matrix.n:
                raise UsageError(f"truth has length {len(truth)}, expected n={self.matrix.n}")
        sigma = float(self.noise_sigma)
        if not sigma >= 0.0:
            raise UsageError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        object.__setattr__(self, "noise_sigma", sigma)
        if self.matrix.m >= self.matrix.n:
            warnings.warn(
                f"m={self.matrix.m} >= n={self.matrix.n}: not an underdetermined CS instance",
                stacklevel=3,
            )

    @property
    def m(self) -> int:
        return self.matrix.m

    @property
    def n(self) -> int:
        return self.matrix.n

    def __eq__(self, other):
        if not isinstance(other, Problem):
            return NotImplemented
        return (
            self.matrix == other.matrix
            and np.array_equal(self.y, other.y)
            and self.truth == other.truth
            and self.noise_sigma == other.noise_sigma
        )


def _check_vector(z, n, what="z"):
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size != n:
        raise UsageError(f"{what} has shape {z.shape}, expected ({n},)")
    return z


def row_dot(M: DenseMatrix, i: int, z) -> float:
    """Inner product of row ``i`` of ``M`` with ``z``."""
    z = _check_vector(z, M.n)
    if not 0 <= i < M.m:
        raise UsageError(f"row index {i} out of range for m={M.m}")
    return float(np.dot(M.array[i], z))


def residual(P: Problem, z) -> np.ndarray:
    """``y - H z``."""
    z = _check_vector(z, P.n)
    return P.y - P.matrix.matvec(z)


# --- file IO -----------------------------------------------------------------


def _fmt(values) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def save_problem(P: Problem, path) -> None:
    header = f"{_MAGIC} {_VERSION} {P.m} {P.n} {format(P.noise_sigma, '.17g')}"
    if P.truth is not None and P.truth.kind == COMPRESSIBLE:
        header += " " + COMPRESSIBLE
    lines = [header, "y: " + _fmt(P.y)]
    lines.extend(_fmt(row) for row in P.matrix.array)
    if P.truth is not None:
        lines.append("x: " + _fmt(P.truth.values))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _parse_floats(text, expected, lineno, what):
    parts = text.split()
    if len(parts) != expected:
        raise ProblemFormatError(f"{what}: expected {expected} values, found {len(parts)}", lineno)
    try:
        vals = np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as exc:
        raise ProblemFormatError(f"{what}: {exc}", lineno) from None
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        raise ProblemFormatError(f"{what}: non-finite value at offset {bad[0]}", lineno)
    return vals


def load_problem(path) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ProblemFormatError("empty file", 1)

    head = lines[0].split()
    if len(head) not in (5, 6) or head[0] != _MAGIC or head[1] != _VERSION:
        raise ProblemFormatError(f"bad header {lines[0]!r}", 1)
    try:
        m, n = int(head[2]), int(head[3])
        sigma = float(head[4])
    except ValueError:
        raise ProblemFormatError(f"bad header {lines[0]!r}", 1) from None
    if m < 1 or n < 1:
        raise ProblemFormatError(f"dimensions must be positive, got m={m} n={n}", 1)
    if not (math.isfinite(sigma) and sigma >= 0):
        raise ProblemFormatError(f"sigma must be finite and >= 0, got {head[4]}", 1)
    kind = SPARSE
    if len(head) == 6:
        if head[5] != COMPRESSIBLE:
            raise ProblemFormatError(f"unknown header token {head[5]!r}", 1)
        kind = COMPRESSIBLE

    if len(lines) < 2 or not lines[1].startswith("y:"):
        raise ProblemFormatError("expected 'y:' line", 2)
    y = _parse_floats(lines[1][2:], m, 2, "y")

    if len(lines) < 2 + m:
        raise ProblemFormatError(
            f"header declares m={m} rows but only {len(lines) - 2} present", len(lines) + 1
        )
    rows = np.empty((m, n), dtype=np.float64)
    for i in range(m):
        lineno = i + 3
        text = lines[2 + i]
        if text.startswith("x:"):
            raise ProblemFormatError(f"header declares m={m} rows but only {i} present", lineno)
        rows[i] = _parse_floats(text, n, lineno, f"row {i}")

    truth = None
    rest = lines[2 + m :]
    if rest:
        lineno = 3 + m
        if len(rest) > 1 or not rest[0].startswith("x:"):
            raise ProblemFormatError("unexpected trailing content", lineno)
        truth = Signal(_parse_floats(rest[0][2:], n, lineno, "x"), kind)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Problem(DenseMatrix(rows), y, truth, sigma, meta={"source": os.fspath(path)})
