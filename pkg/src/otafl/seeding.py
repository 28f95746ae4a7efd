"""Deterministic random streams keyed by (seed, round, device, purpose)."""

import numpy as np

# purpose tags for spawn keys
PLACEMENT = 0
CHANNEL = 1
BATCH = 2
NOISE = 3
DATA = 4
INIT = 5


def stream(seed, *key):
    """Independent generator for ``seed`` and an integer key path.

    The same ``(seed, key)`` always yields the same stream regardless of
    which other streams were drawn before it.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))
