"""Closed convex sets ``Q = {z : f(z) <= 0}`` described through a function
value and one subgradient selection, and the two relaxed subgradient steps
used by the compressed sensing formulation.

The l1 subgradient uses the convention ``sign(0) = +1``, so every component
of the selected subgradient is +-1 and its squared norm is exactly ``n``.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateConstraintError, UsageError

__all__ = [
    "ConvexConstraint",
    "HyperplaneConstraint",
    "HalfspaceConstraint",
    "L1BallConstraint",
    "sign_convention",
    "l1_subgradient",
    "hyperplane_step",
    "l1_step",
    "subgradient_step",
]


class ConvexConstraint:
    """Base class for ``f(z) <= 0`` constraints.

    Subclasses implement :meth:`value` and :meth:`subgrad`.  Setting
    ``is_equality`` makes the solvers project whenever ``f(z) != 0``
    instead of only when ``f(z) > 0``.
    """

    is_equality = False

    def value(self, z) -> float:
        raise NotImplementedError

    def subgrad(self, z) -> np.ndarray:
        raise NotImplementedError

    def subgrad_norm_sq(self, z) -> float:
        t = self.subgrad(z)
        return float(np.dot(t, t))

    def is_active(self, z, fz=None) -> bool:
        fz = self.value(z) if fz is None else fz
        return fz != 0.0 if self.is_equality else fz > 0.0


class HyperplaneConstraint(ConvexConstraint):
    """``<h, z> = target``, written as ``f(z) = <h, z> - target``."""

    is_equality = True

    def __init__(self, row, target):
        self.row = np.asarray(row, dtype=np.float64)
        self.target = float(target)
        self.norm_sq = float(np.dot(self.row, self.row))
        if not self.norm_sq > 0.0:
            raise DegenerateConstraintError("hyperplane normal has zero norm")

    def value(self, z):
        return float(np.dot(self.row, z)) - self.target

    def subgrad(self, z):
        return self.row

    def subgrad_norm_sq(self, z):
        return self.norm_sq


class HalfspaceConstraint(HyperplaneConstraint):
    """``<a, z> <= b``."""

    is_equality = False


class L1BallConstraint(ConvexConstraint):
    """``||z||_1 <= budget``."""

    def __init__(self, budget, n):
        budget = float(budget)
        if not budget > 0.0:
            raise UsageError(f"l1 budget must be > 0, got {budget}")
        if n < 1:
            raise UsageError(f"dimension must be >= 1, got {n}")
        self.budget = budget
        self.n = int(n)

    def value(self, z):
        return float(np.sum(np.abs(z))) - self.budget

    def subgrad(self, z):
        return l1_subgradient(z)

    def subgrad_norm_sq(self, z):
        return float(self.n)


def sign_convention(v: float) -> float:
    return 1.0 if v >= 0 else -1.0


def l1_subgradient(z) -> np.ndarray:
    """Componentwise sign of ``z`` with zeros mapped to +1."""
    z = np.asarray(z, dtype=np.float64)
    return np.where(z >= 0, 1.0, -1.0)


def hyperplane_step(c: HyperplaneConstraint, z, alpha: float) -> np.ndarray:
    """Relaxed projection of ``z`` onto the hyperplane of ``c``.

    Applied regardless of the sign of the residual.
    """
    if not c.norm_sq > 0.0:
        raise DegenerateConstraintError("hyperplane normal has zero norm")
    z = np.asarray(z, dtype=np.float64)
    return z - (alpha * (float(np.dot(c.row, z)) - c.target) / c.norm_sq) * c.row


def l1_step(c: L1BallConstraint, z, lam: float) -> np.ndarray:
    """Subgradient step toward the l1 ball, inactive inside it."""
    z = np.asarray(z, dtype=np.float64)
    excess = float(np.sum(np.abs(z))) - c.budget
    if excess <= 0.0:
        return z.copy()
    return z - (lam * excess / c.n) * l1_subgradient(z)


def subgradient_step(c: ConvexConstraint, z, alpha: float, index=None) -> np.ndarray:
    """Generic relaxed subgradient projection ``z - alpha f(z)/||t||^2 t``.

    Returns ``z`` unchanged (a copy) when the constraint is inactive.
    """
    z = np.asarray(z, dtype=np.float64)
    fz = c.value(z)
    if not c.is_active(z, fz):
        return z.copy()
    t = c.subgrad(z)
    tt = c.subgrad_norm_sq(z)
    if not tt > 0.0:
        where = "" if index is None else f" {index}"
        raise DegenerateConstraintError(
            f"constraint{where} has zero subgradient at a violating point", index
        )
    return z - (alpha * fz / tt) * t
