"""Named solver presets.

The ``paper`` schedule uses a fixed hyperplane relaxation of 1.8, an l1
budget of 1e-4 and a two-phase l1 relaxation expressed per coordinate::

    lambda_k / n = 70**-2                     for k <= 2000
                 = 100**-2 / (1 + k / 1e4)    otherwise

capped at 5000 sweeps.  The step tolerance is 0.01 for the small
(512 x 1024) scale and 0.5 for anything larger.  For ``n`` above roughly
9800 the raw ``lambda_k`` would leave (0, 2); it is clipped to the
admissible range.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UsageError
from .solvers import RELAX_MAX, SolverConfig

__all__ = ["PaperSchedule", "paper_config", "PRESETS", "preset_config", "scale_for"]

SMALL_GAMMA = 0.01
LARGE_GAMMA = 0.5
SMALL_SCALE_N = 1024


@dataclass(frozen=True)
class PaperSchedule:
    """``lambda_k`` for an unknown of dimension ``n``."""

    n: int
    alpha: float = 1.8
    l1_budget: float = 1e-4
    switch: int = 2000
    max_iterations: int = 5000

    def rate(self, k: int) -> float:
        """``lambda_k / n``; discontinuous at the switch."""
        if k <= self.switch:
            return 70.0**-2
        return 100.0**-2 / (1.0 + k / 1e4)

    def __call__(self, k: int) -> float:
        return min(self.n * self.rate(k), RELAX_MAX)

    def config(self, gamma: float, block_size: int = 256) -> SolverConfig:
        return SolverConfig(
            alpha=self.alpha,
            lam=self,
            l1_budget=self.l1_budget,
            max_iterations=self.max_iterations,
            step_tolerance=gamma,
            block_size=block_size,
        )


def scale_for(n: int) -> str:
    return "paper-small" if n <= SMALL_SCALE_N else "paper-large"


def paper_config(n: int, scale: str = "auto", **overrides) -> SolverConfig:
    """Paper schedule for an ``n``-dimensional unknown.

    ``scale`` picks the step tolerance: ``"small"``, ``"large"`` or
    ``"auto"`` (small iff ``n <= 1024``).
    """
    if scale == "auto":
        scale = "small" if n <= SMALL_SCALE_N else "large"
    if scale not in ("small", "large"):
        raise UsageError(f"unknown preset scale {scale!r}")
    gamma = SMALL_GAMMA if scale == "small" else LARGE_GAMMA
    cfg = PaperSchedule(n).config(gamma)
    return cfg.replace(**overrides) if overrides else cfg


PRESETS = ("paper-small", "paper-large", "paper")


def preset_config(name: str, n: int, **overrides) -> SolverConfig:
    if name == "paper-small":
        return paper_config(n, "small", **overrides)
    if name == "paper-large":
        return paper_config(n, "large", **overrides)
    if name == "paper":
        return paper_config(n, "auto", **overrides)
    raise UsageError(f"unknown preset {name!r}; expected one of {PRESETS}")
