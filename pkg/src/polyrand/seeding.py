"""Deterministic seed fan-out.

Every randomized operation takes a master seed and derives per-operation
and per-chunk generators through ``numpy.random.SeedSequence`` spawn
keys.  The derived stream depends only on (master seed, key path), never
on evaluation order or worker count, so grid evaluations can be farmed
out to any number of workers and still reproduce bit-for-bit.
"""

from __future__ import annotations

import numpy as np


def subseed(seed, *path) -> np.random.SeedSequence:
    """SeedSequence for a (seed, path) pair; path entries are small ints
    or strings (strings are hashed stably).  A tuple seed (master, *more)
    folds its extra entries into the front of the path."""
    if isinstance(seed, tuple):
        seed, *extra = seed
        path = tuple(extra) + tuple(path)
    key = []
    for p in path:
        if isinstance(p, str):
            # stable 32-bit hash, independent of PYTHONHASHSEED
            h = 2166136261
            for ch in p.encode():
                h = ((h ^ ch) * 16777619) & 0xFFFFFFFF
            key.append(h)
        else:
            key.append(int(p) & 0xFFFFFFFF)
    return np.random.SeedSequence(int(seed), spawn_key=tuple(key))


def rng_for(seed, *path) -> np.random.Generator:
    """Fresh PCG64 generator for the given seed path."""
    return np.random.default_rng(subseed(seed, *path))
