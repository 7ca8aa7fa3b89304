"""Portable seeded randomness.

Every sampled channel, pmf and joint in this package is drawn from
``SplitMix64`` so that the same seed reproduces the same numbers in any
language. The full recipe:

* state update: ``state = (state + 0x9E3779B97F4A7C15) mod 2**64``
* output: ``z = state``; ``z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9``;
  ``z = (z ^ (z >> 27)) * 0x94D049BB133111EB``; ``z ^ (z >> 31)``
  (all products mod 2**64)
* ``random()``: ``(next_u64() >> 11) * 2**-53``, a double in [0, 1)
* ``integer(lo, hi)``: ``lo + ((next_u64() * (hi - lo + 1)) >> 64)``, inclusive
* ``dirichlet_ones(n)``: ``E_i = -ln(1 - random())`` for i = 0..n-1, then
  ``E / sum(E)``
* ``derive(i)``: the child seed equal to output ``i`` (from 0) of a fresh
  generator on the parent seed, used to give every sampled channel its own
  seed.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """64-bit SplitMix generator (Steele, Lea and Flood)."""

    def __init__(self, seed: int = 0):
        if seed < 0:
            raise ValueError("seed must be a nonnegative 64-bit integer")
        self.seed = seed & _MASK
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        if hi < lo:
            raise ValueError("empty integer range")
        span = hi - lo + 1
        return lo + ((self.next_u64() * span) >> 64)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def dirichlet_ones(self, n: int) -> np.ndarray:
        """A point drawn uniformly from the (n-1)-simplex."""
        e = np.array([-math.log1p(-self.random()) for _ in range(n)])
        total = e.sum()
        if total <= 0.0:  # every draw was exactly 0; astronomically rare
            return np.full(n, 1.0 / n)
        return e / total

    def derive(self, index: int) -> int:
        """Seed of the ``index``-th child stream."""
        return _mix((self.seed + (index + 1) * _GAMMA) & _MASK)
