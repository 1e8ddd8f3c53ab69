"""Deterministic derivation of component seeds from one global seed.

Every randomized component draws from its own stream, keyed by
(global seed, stream id, fold index) through numpy's SeedSequence, so
splitting, initialization and swarm randomness stay independently
reproducible under a single seed.
"""

import numpy as np

SPLIT_STREAM = 0
INIT_STREAM = 1
SWARM_STREAM = 2


def seed_for(global_seed: int, stream: int, fold: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence((global_seed, stream, fold))
