"""Counter-based random streams for reproducible parallel Monte-Carlo.

Every stochastic routine in this package takes an explicit generator.
Streams are addressed by (master seed, path of integers), typically
(seed, stage, trial index). The mapping is a pure function, so trials can
be evaluated on any number of workers, in any order, with identical
results.
"""

from __future__ import annotations

import numpy as np

# Stage tags keep independent parts of an experiment on disjoint streams.
STAGE_CALIBRATION = 1
STAGE_EVALUATION = 2
STAGE_CHANNEL = 3
STAGE_DATA = 4
STAGE_SCRAMBLER = 5
STAGE_INTERLEAVER = 6
STAGE_CODE = 7
STAGE_ONLINE = 8


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the counter-based stream addressed by (seed, *path)."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
