"""Derivation multi-indices and ordered index sets.

S(r,h) is ordered by descending lexicographic exponent tuples (the graded
monomial order restricted to one degree layer), so S(3,1) reads x, y, z;
p-subsets are ordered lexicographically.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import List, Tuple

MultiIndex = Tuple[int, ...]

__all__ = [
    "MultiIndex",
    "zero_index",
    "degree",
    "multi_indices",
    "index_position",
    "add_unit",
    "sub_unit",
    "multi_factorial",
    "p_subsets",
]


def zero_index(r: int) -> MultiIndex:
    return (0,) * r


def degree(L: MultiIndex) -> int:
    return sum(L)


@lru_cache(maxsize=None)
def multi_indices(r: int, h: int) -> Tuple[MultiIndex, ...]:
    """All multi-indices of degree h in r slots, ordered."""
    if r < 1 or h < 0:
        raise ValueError(f"multi_indices needs r >= 1, h >= 0, got ({r},{h})")

    def rec(slots: int, total: int):
        if slots == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in rec(slots - 1, total - first):
                yield (first,) + rest

    return tuple(rec(r, h))


@lru_cache(maxsize=None)
def _position_map(r: int, h: int) -> dict:
    return {L: i for i, L in enumerate(multi_indices(r, h))}


def index_position(L: MultiIndex) -> int:
    """Position of L inside multi_indices(len(L), degree(L))."""
    return _position_map(len(L), degree(L))[L]


def add_unit(L: MultiIndex, j: int) -> MultiIndex:
    return L[:j] + (L[j] + 1,) + L[j + 1 :]


def sub_unit(L: MultiIndex, j: int) -> MultiIndex:
    if L[j] == 0:
        raise ValueError(f"cannot decrement slot {j} of {L}")
    return L[:j] + (L[j] - 1,) + L[j + 1 :]


def multi_factorial(L: MultiIndex) -> int:
    out = 1
    for e in L:
        out *= factorial(e)
    return out


@lru_cache(maxsize=None)
def p_subsets(r: int, p: int) -> Tuple[Tuple[int, ...], ...]:
    """All p-element subsets of {0,..,r-1} as sorted tuples, lexicographic."""
    return tuple(combinations(range(r), p))
