"""Deterministic random-stream addressing.

Every stochastic element (disorder realizations, trajectory unravelings,
shot sampling) draws from its own ``SeedSequence`` keyed by a stream tag
plus integer coordinates, so any single item is reproducible without
generating its predecessors and results do not depend on scheduling.
"""

from __future__ import annotations

import numpy as np

DISORDER_STREAM = 1
TRAJECTORY_STREAM = 2
SHOT_STREAM = 3


def seed_for(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))


def rng_for(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(seed_for(seed, *key))
