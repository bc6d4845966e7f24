"""Deterministic 64-bit pseudo-random number generator.

Stimulus schedules must replay bit-for-bit for a given seed, independent of
interpreter hash randomization or global random state, so the generator is
hand-rolled here instead of relying on ``random.Random``. It is the usual
splitmix construction: a Weyl sequence fed through an avalanching finalizer.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """Finalize a 64-bit value into a well-scrambled one (stateless)."""
    z = (z + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def combine_seeds(stream_seed: int, run_seed: int) -> int:
    """Derive one stream seed from a per-stream seed and a global run seed.

    Distinct run seeds must yield distinct streams even when the per-stream
    seed is 0, hence the +1 on the run seed before mixing.
    """
    return mix64((stream_seed & _MASK) ^ mix64((run_seed + 1) & _MASK))


class SplitMix64:
    """Sequential splitmix64 stream."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return (z ^ (z >> 31)) & _MASK

    def next_float(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def next_exponential(self, rate: float) -> float:
        """Exponentially distributed inter-arrival time for a Poisson process."""
        u = self.next_float()
        return -math.log1p(-u) / rate
