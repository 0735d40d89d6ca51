"""Deterministic random streams.

Every random draw in a run comes from a ``numpy.random.Philox`` (4x32, 10 rounds)
bit generator seeded by a ``SeedSequence`` whose entropy is the master seed and
whose spawn key names the consumer::

    (run, generation, member, stream)

Because the spawn key fully determines the stream, results do not depend on
evaluation order or on how many worker processes are used.
"""

from __future__ import annotations

import numpy as np

RNG_SPEC = "numpy.random.Philox(4x32-10) <- SeedSequence(entropy=master_seed, spawn_key=(run, generation, member, stream))"

# Stream tags, the last element of every spawn key.
INIT = 0
BREED = 1
EVAL = 2
EVAL_MUTATED = 3
SOLVE_CHECK = 4
CHAMPION_EVAL = 5

NO_MEMBER = 2**32 - 1


def stream(master_seed: int, run: int, generation: int, member: int, tag: int) -> np.random.Generator:
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(run, generation, member, tag))
    return np.random.Generator(np.random.Philox(seq))


def seed_from_rng(rng: np.random.Generator) -> int:
    """Draw a 64-bit sub-seed from ``rng``."""
    return int(rng.integers(0, 2**63, dtype=np.int64))
