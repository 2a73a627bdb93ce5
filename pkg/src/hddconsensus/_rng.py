"""Seed-derived random substreams.

Every consumer of randomness asks for a stream keyed by ``(purpose, index)``.
Streams are derived from the base seed with :class:`numpy.random.SeedSequence`
spawn keys, so drawing from one stream never shifts another and adding new
consumers (or logging) cannot perturb an existing trajectory.
"""

from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    GRAPH = 0
    INITIAL_STATE = 1
    PREFILL = 2
    CONFIDENCE = 3
    ADVERSARY = 4


def substream(seed: int, purpose: Purpose, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(purpose), int(index)))
    return np.random.Generator(np.random.PCG64(ss))
