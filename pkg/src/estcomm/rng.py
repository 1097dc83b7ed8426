"""Deterministic randomness streams.

Every random choice in the library flows through a counter-based Philox
generator keyed by an integer seed plus a tuple of non-negative integers
(the "path").  Two calls with the same seed and path yield identical
streams; distinct paths yield statistically independent streams.  This is
what makes whole experiments replayable from a single recorded seed.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "derive_seed", "mix64"]


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator at `path` under `seed`.

    Shared randomness between the two simulated parties is modeled by both
    sides reading the same stream; that costs no communication.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Fold (seed, path) into a single replayable 63-bit integer seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def mix64(key: int, x: int) -> int:
    """Stateless 64-bit mixer; a cheap keyed hash for one-off bucket draws.

    Used where both parties must evaluate a shared random function at
    arbitrary points without materializing it (e.g. hashing a huge domain
    into buckets).  splitmix64 finalizer, which passes the usual avalanche
    tests.
    """
    z = (int(key) ^ (int(x) * _GOLDEN)) & _MASK
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK
