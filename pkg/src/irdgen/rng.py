"""Seeded, stateless random substreams.

Every generator draws from a substream keyed by ``(seed, *key)`` so that
independent pieces of work (type assignment, one ordered type pair, one
replicate) are reproducible regardless of execution order.
"""

import numpy as np

GenSeed = int

_U64 = 2**64

# substream key namespaces
TYPES = 0
PAIRS = 1
ARCS = 2
COLOURS = 3


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def substream(seed, *key):
    """Return a Generator for the substream ``(seed, *key)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def hash64(seed, index):
    """Deterministic 64-bit child seed of ``seed`` for an integer index."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
