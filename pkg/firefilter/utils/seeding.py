"""Counter-based random substreams.

Every random draw in a run comes from a generator keyed by the master seed and a tuple of
integers (cycle, slot, ...). Workers never share a generator, so results do not depend on
how many threads run or in which order they finish.
"""

import numpy as np

# key components for streams that are not tied to a (cycle, particle) pair
RESAMPLE_SLOT = -1
PRIOR_SLOT = -2
ENKF_WALK_SLOT = -3
ENKF_OBS_SLOT = -4
SYNTH_SLOT = -5


def substream(seed: int, *key: int) -> np.random.Generator:
    """Returns an independent generator for ``(seed, key)``."""
    spawn_key = tuple(k % (2**32) for k in key)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=spawn_key))
