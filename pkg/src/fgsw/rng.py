"""Deterministic substreams of a single master seed.

Every randomized quantity in the package is drawn from a Philox
(counter-based) generator keyed by the master seed plus a hashed stream
path, so any value can be regenerated in isolation: the draws of one
node never depend on how many draws another node consumed, on
evaluation order, or on thread count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Domain tags keep unrelated stream families apart even when their
# integer path components collide.
DOMAIN_MEMBERSHIP = 1
DOMAIN_CONTACTS = 2
DOMAIN_PAIRS = 3
DOMAIN_SAMPLES = 4
DOMAIN_REDRAW = 5


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(master_seed: int, *path: int) -> int:
    """Collapse (seed, path...) into one 64-bit stream identifier."""
    h = _splitmix64(master_seed & _MASK64)
    for part in path:
        h = _splitmix64(h ^ (part & _MASK64))
    return h


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for the given stream path.

    The same (seed, path) always yields the same generator state; the
    i-th value drawn from it is a pure function of (seed, path, i).
    """
    key = np.array([master_seed & _MASK64, stream_key(master_seed, *path)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
