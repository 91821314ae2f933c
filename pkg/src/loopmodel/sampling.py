"""Seeded exact rational sample points for identity testing.

Points are fractions p/q with 1 <= |p|, q <= 9, drawn from a seeded PRNG so
that every verification run is reproducible; callers exclude the poles of the
operators they evaluate by resampling.
"""

from __future__ import annotations

import random
from fractions import Fraction

NUMERATOR_RANGE = 9
DENOMINATOR_RANGE = 9


class RationalSampler:
    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def nonzero(self, exclude_abs_one: bool = False) -> Fraction:
        while True:
            p = self._rng.randint(-NUMERATOR_RANGE, NUMERATOR_RANGE)
            q = self._rng.randint(1, DENOMINATOR_RANGE)
            if p == 0:
                continue
            value = Fraction(p, q)
            if exclude_abs_one and abs(value) == 1:
                continue
            return value

    def distinct(self, count: int, exclude_abs_one: bool = False) -> list[Fraction]:
        """Pairwise distinct values, also avoiding mutual inverses."""
        out: list[Fraction] = []
        while len(out) < count:
            v = self.nonzero(exclude_abs_one=exclude_abs_one)
            if all(v != w and v * w != 1 for w in out):
                out.append(v)
        return out
