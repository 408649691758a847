"""Scalar backends shared by the jet/matrix machinery.

ExactField works in canonical rational functions over a fixed variable
order; TreeField keeps expression trees and supports the transcendental
functions.  Both expose the same small surface so the jet builders stay
backend-agnostic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Sequence, Union

from . import expr as ex
from .poly import RationalFunction

Scalar = Union[RationalFunction, ex.Expr]

__all__ = ["ExactField", "TreeField", "Scalar", "field_for"]


class ExactField:
    """Rational functions over Q(vars)."""

    is_exact = True

    def __init__(self, variables: Sequence[str]):
        self.vars = tuple(variables)

    def const(self, value) -> RationalFunction:
        return RationalFunction.const(self.vars, value)

    def var(self, name: str) -> RationalFunction:
        return RationalFunction.variable(self.vars, name)

    def from_expr(self, e: ex.Expr) -> RationalFunction:
        return ex.expr_to_rf(e, self.vars)

    def diff(self, s: RationalFunction, name: str) -> RationalFunction:
        return s.diff_name(name)

    def is_zero(self, s: RationalFunction) -> bool:
        return s.is_zero()

    def eval_exact(self, s: RationalFunction, point: Mapping[str, Fraction]) -> Fraction:
        return s.eval_exact([point[v] for v in self.vars])

    def eval_mpf(self, s: RationalFunction, point: Mapping[str, object], mp):
        return s.eval_mpf(
            [
                mp.mpf(point[v].numerator) / point[v].denominator
                if isinstance(point[v], Fraction)
                else point[v]
                for v in self.vars
            ],
            mp,
        )

    def to_string(self, s: RationalFunction) -> str:
        return str(s)


class TreeField:
    """Expression trees; the backend for webs with sqrt/ln/atan generators."""

    is_exact = False

    def __init__(self, variables: Sequence[str]):
        self.vars = tuple(variables)

    def const(self, value) -> ex.Expr:
        return ex.Const(value)

    def var(self, name: str) -> ex.Expr:
        return ex.Var(name)

    def from_expr(self, e: ex.Expr) -> ex.Expr:
        return e

    def diff(self, s: ex.Expr, name: str) -> ex.Expr:
        return ex.differentiate(s, name)

    def is_zero(self, s: ex.Expr) -> bool:
        return isinstance(s, ex.Const) and s.value == 0

    def eval_exact(self, s: ex.Expr, point: Mapping[str, Fraction]) -> Fraction:
        return ex.eval_exact(s, point)

    def eval_mpf(self, s: ex.Expr, point: Mapping[str, object], mp):
        return ex.eval_mpf(s, point, mp)

    def to_string(self, s: ex.Expr) -> str:
        return ex.expr_str(s)


def field_for(variables: Sequence[str], rational: bool):
    return ExactField(variables) if rational else TreeField(variables)


def scalar_add(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, RationalFunction):
        return a + b
    return ex.eadd(a, b)


def scalar_sub(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, RationalFunction):
        return a - b
    return ex.esub(a, b)


def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, RationalFunction):
        return a * b
    return ex.emul(a, b)


def scalar_div(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, RationalFunction):
        return a / b
    return ex.ediv(a, b)
