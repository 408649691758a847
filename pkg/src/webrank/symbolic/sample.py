"""Seeded rational sample points for generic-rank and zero tests."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

__all__ = ["PointSelectionFailed", "PointSampler"]

MAX_NUMERATOR = 97
MAX_DENOMINATOR = 97


class PointSelectionFailed(RuntimeError):
    """No admissible sample point found within the retry budget."""


class PointSampler:
    """Draws points with rational coordinates, numerator/denominator <= 97.

    A predicate can reject points (vanishing denominators, sqrt/ln domain);
    rejected draws are resampled up to `retries` times.
    """

    def __init__(self, variables: Sequence[str], seed: int = 0, retries: int = 40):
        self.variables = tuple(variables)
        self.rng = random.Random(seed)
        self.retries = retries

    def raw_point(self) -> Dict[str, Fraction]:
        return {
            v: Fraction(
                self.rng.randint(-MAX_NUMERATOR, MAX_NUMERATOR),
                self.rng.randint(1, MAX_DENOMINATOR),
            )
            for v in self.variables
        }

    def positive_unit_point(self) -> Dict[str, Fraction]:
        """Point with coordinates in (0, 1]: stays on the branch of the germ
        at a base point in the positive orthant (sqrt/ln identities are
        branch-sensitive; ranks are not)."""
        out = {}
        for v in self.variables:
            den = self.rng.randint(1, MAX_DENOMINATOR)
            out[v] = Fraction(self.rng.randint(1, den), den)
        return out

    def point(self, admissible: Optional[Callable[[Dict[str, Fraction]], bool]] = None):
        for _ in range(self.retries):
            pt = self.raw_point()
            if admissible is None or admissible(pt):
                return pt
        raise PointSelectionFailed(
            f"no admissible point after {self.retries} draws for {self.variables}"
        )

    def points(self, count: int, admissible=None) -> List[Dict[str, Fraction]]:
        return [self.point(admissible) for _ in range(count)]
