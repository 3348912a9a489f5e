"""Seeded random streams.

Every generator draws from numpy's PCG64 bit generator seeded through a
``SeedSequence``.  Monte Carlo campaigns derive one 64-bit seed per
(cell, run) pair from the master seed::

    SeedSequence(master_seed, spawn_key=(cell, run)).generate_state(1, uint64)[0]

so runs are independent, reproducible on any platform numpy supports, and
can be generated in any order or in parallel.
"""

import numpy as np

__all__ = ["BIT_GENERATOR", "make_rng", "run_seed"]

BIT_GENERATOR = "PCG64"


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def run_seed(master_seed: int, run: int, cell: int = 0) -> int:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(cell), int(run)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
