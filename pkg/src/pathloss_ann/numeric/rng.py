"""Seeded random numbers and sub-seed derivation.

Draws come from the standard library's Mersenne Twister (MT19937) seeded with
a 64-bit integer. Its output for a given seed is fixed across platforms and
Python versions, which is what makes splits and initial weights reproducible.
Independent streams are obtained by deriving child seeds with the SplitMix64
finalizer rather than by sharing one generator.
"""

from __future__ import annotations

import random
from array import array

from .matrix import Matrix

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 step: advance by the golden gamma and finalize."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for the stream identified by ``path`` under ``seed``.

    ``derive_seed(s, a, b)`` folds each path element into the state with
    SplitMix64, so distinct paths give statistically independent seeds.
    """
    z = splitmix64(seed & MASK64)
    for p in path:
        z = splitmix64(z ^ (p & MASK64))
    return z


class Rng:
    """Single-owner random stream; do not share one instance between threads."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._gen = random.Random(self.seed)

    def random(self) -> float:
        return self._gen.random()

    def uniform(self, lo: float, hi: float) -> float:
        if lo > hi:
            raise ValueError(f"uniform: lo={lo} exceeds hi={hi}")
        return lo + (hi - lo) * self._gen.random()

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        return self._gen.gauss(mu, sigma)

    def permutation(self, n: int) -> list[int]:
        idx = list(range(n))
        self._gen.shuffle(idx)
        return idx


def uniform(rng: Rng, lo: float, hi: float, rows: int, cols: int) -> Matrix:
    """Matrix of i.i.d. draws on [lo, hi)."""
    if lo > hi:
        raise ValueError(f"uniform: lo={lo} exceeds hi={hi}")
    draw = rng._gen.random
    width = hi - lo
    return Matrix._wrap(rows, cols, array("d", [lo + width * draw() for _ in range(rows * cols)]))
