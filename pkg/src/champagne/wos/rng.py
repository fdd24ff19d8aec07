"""Counter-based splitmix64 streams.

Every trial owns the stream keyed by (seed, stream, trial); draws are pure
functions of (key, counter), so results do not depend on which thread runs
which trial.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
INV53 = 1.0 / 9007199254740992.0
MASK = (1 << 64) - 1


@njit(cache=True, inline="always")
def mix64(z):
    z = uint64(z)
    z = (z ^ (z >> uint64(30))) * M1
    z = (z ^ (z >> uint64(27))) * M2
    return z ^ (z >> uint64(31))


@njit(cache=True)
def trial_key(seed, stream, trial):
    k = mix64(uint64(seed) + GOLDEN)
    k = mix64(k ^ (uint64(stream) * GOLDEN + uint64(0x632BE59BD9B4E019)))
    return mix64(k ^ (uint64(trial) + GOLDEN))


@njit(cache=True, inline="always")
def uniform(key, counter):
    """Double in [0, 1) from the counter-th draw of stream ``key``."""
    z = mix64(uint64(key) + (uint64(counter) + uint64(1)) * GOLDEN)
    return float(z >> uint64(11)) * INV53


def mix64_py(z: int) -> int:
    """Pure-Python reference for tests."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def uniform_py(key: int, counter: int) -> float:
    z = mix64_py((key + (counter + 1) * 0x9E3779B97F4A7C15) & MASK)
    return (z >> 11) * (1.0 / 9007199254740992.0)
