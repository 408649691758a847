"""Webs of codimension q: model, validation, jacobian minors, tangent data.

A web is d foliations on an n-dimensional domain, each given by q generator
expressions whose differentials stay independent.  Indices are 0-based
throughout this module; the CLI and file formats speak 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from .symbolic import (
    DomainError,
    DivisionByZero,
    ExactUnsupported,
    Expr,
    ExactField,
    PointSampler,
    SymbolicMatrix,
    differentiate,
    eval_mpf,
    expr_str,
    expr_to_rf,
    field_for,
    free_variables,
    is_rational_expr,
    parse_expression,
    rank_of_rows_exact,
    rank_of_rows_mpf,
    rank_symbolic,
)
from .symbolic.field import Scalar, scalar_mul, scalar_sub

__all__ = [
    "Foliation",
    "Web",
    "WebValidationError",
    "WrongCodimension",
    "ValidationReport",
    "validate",
    "jacobian_minor",
    "tangent_fields",
    "bracket_test",
    "is_affine",
    "load_web",
    "web_from_dict",
    "web_to_dict",
]


class WebValidationError(ValueError):
    pass


class WrongCodimension(ValueError):
    pass


@dataclass(frozen=True)
class Foliation:
    generators: Tuple[Expr, ...]


class Web:
    def __init__(self, name: str, variables: Sequence[str], q: int, foliations: Sequence[Foliation]):
        self.name = name
        self.variables = tuple(variables)
        self.n = len(self.variables)
        self.q = q
        self.foliations = list(foliations)
        self.d = len(self.foliations)
        if not (1 <= self.q <= self.n - 1):
            raise WebValidationError(f"need 1 <= q <= n-1, got q={self.q}, n={self.n}")
        if self.d < 1:
            raise WebValidationError("a web needs at least one foliation")
        for i, f in enumerate(self.foliations):
            if len(f.generators) != self.q:
                raise WebValidationError(
                    f"foliation {i + 1} has {len(f.generators)} generators, expected q={self.q}"
                )
            for g in f.generators:
                unknown = free_variables(g) - set(self.variables)
                if unknown:
                    raise WebValidationError(
                        f"foliation {i + 1} uses undeclared variables {sorted(unknown)}"
                    )
        self.is_rational = all(
            is_rational_expr(g) for f in self.foliations for g in f.generators
        )
        self.field = field_for(self.variables, self.is_rational)
        self._gens = [
            [self.field.from_expr(g) for g in f.generators] for f in self.foliations
        ]
        self._dgens = [
            [[self.field.diff(g, v) for v in self.variables] for g in gens]
            for gens in self._gens
        ]

    def generator(self, i: int, alpha: int) -> Scalar:
        return self._gens[i][alpha]

    def generator_derivative(self, i: int, alpha: int, lam: int) -> Scalar:
        return self._dgens[i][alpha][lam]

    def sampler(self, seed: int = 0) -> PointSampler:
        return PointSampler(self.variables, seed=seed)

    def admissible(self, point: Dict[str, Fraction]) -> bool:
        """Point at which all generators and their first two derivatives evaluate."""
        try:
            if self.is_rational:
                for gens in self._gens:
                    for g in gens:
                        self.field.eval_exact(g, point)
                return True
            with mpmath.workdps(30):
                for i, gens in enumerate(self._gens):
                    for a, g in enumerate(gens):
                        self.field.eval_mpf(g, point, mpmath.mp)
                        for lam in range(self.n):
                            d1 = self._dgens[i][a][lam]
                            self.field.eval_mpf(d1, point, mpmath.mp)
                            self.field.eval_mpf(
                                self.field.diff(d1, self.variables[lam]), point, mpmath.mp
                            )
            return True
        except (DomainError, DivisionByZero):
            return False

    def sample_points(self, count: int = 3, seed: int = 0) -> List[Dict[str, Fraction]]:
        return self.sampler(seed).points(count, self.admissible)


@dataclass
class ValidationReport:
    valid: bool
    failures: List[str] = dc_field(default_factory=list)
    points: List[Dict[str, Fraction]] = dc_field(default_factory=list)


def _rank_at(web: Web, rows: List[List[Scalar]], point) -> int:
    if web.is_rational:
        vals = [[web.field.eval_exact(s, point) for s in row] for row in rows]
        return rank_of_rows_exact(vals)
    with mpmath.workdps(50):
        vals = [[web.field.eval_mpf(s, point, mpmath.mp) for s in row] for row in rows]
    return rank_of_rows_mpf(vals)


def validate(web: Web, points: Optional[List[Dict[str, Fraction]]] = None, seed: int = 0) -> ValidationReport:
    """Per-foliation regularity plus pairwise transversality at sample points.

    A partial check of general position: the paper leaves the d-fold
    condition unstated, so only single and pairwise jacobian ranks are
    verified.
    """
    if points is None:
        points = web.sample_points(3, seed=seed)
    failures = []
    for i in range(web.d):
        jac = [list(web._dgens[i][a]) for a in range(web.q)]
        for pt in points:
            try:
                if _rank_at(web, jac, pt) != web.q:
                    failures.append(
                        f"foliation {i + 1} jacobian rank < q at {_point_str(pt)}"
                    )
            except (DomainError, DivisionByZero) as exc:
                failures.append(f"foliation {i + 1} not evaluable at {_point_str(pt)}: {exc}")
    expected_pair = min(2 * web.q, web.n)
    for i in range(web.d):
        for j in range(i + 1, web.d):
            stacked = [list(web._dgens[i][a]) for a in range(web.q)] + [
                list(web._dgens[j][a]) for a in range(web.q)
            ]
            for pt in points:
                try:
                    if _rank_at(web, stacked, pt) != expected_pair:
                        failures.append(
                            f"foliations {i + 1},{j + 1} not in general position at {_point_str(pt)}"
                        )
                        break
                except (DomainError, DivisionByZero):
                    continue
    return ValidationReport(valid=not failures, failures=failures, points=points)


def _point_str(pt: Dict[str, Fraction]) -> str:
    return ",".join(f"{k}={v}" for k, v in sorted(pt.items()))


def _det_scalars(web: Web, rows: List[List[Scalar]]) -> Scalar:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    from .symbolic.field import scalar_add

    total = web.field.const(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
        term = scalar_mul(rows[0][j], _det_scalars(web, minor))
        if j % 2 == 0:
            total = scalar_add(total, term)
        else:
            total = scalar_sub(total, term)
    return total


def jacobian_minor(web: Web, i: int, A: Sequence[int], B: Sequence[int]) -> Scalar:
    """det of (d u_{i,alpha} / d x_lambda) for alpha in A (rows), lambda in B (cols)."""
    if len(A) != len(B):
        raise ValueError("A and B must have the same size")
    rows = [[web._dgens[i][a][b] for b in B] for a in A]
    return _det_scalars(web, rows)


def tangent_fields(web: Web) -> List[List[Scalar]]:
    """Generating vector field of each foliation (codimension n-1 only)."""
    if web.q != web.n - 1:
        raise WrongCodimension(f"tangent fields need q = n-1, got q={web.q}, n={web.n}")
    fields = []
    for i in range(web.d):
        comps = []
        for lam in range(web.n):
            cols = [b for b in range(web.n) if b != lam]
            rows = [[web._dgens[i][a][b] for b in cols] for a in range(web.q)]
            minor = _det_scalars(web, rows)
            if lam % 2 == 1:
                minor = scalar_sub(web.field.const(0), minor)
            comps.append(minor)
        fields.append(comps)
    return fields


def _lie_bracket(web: Web, X: List[Scalar], Y: List[Scalar]) -> List[Scalar]:
    from .symbolic.field import scalar_add

    out = []
    for lam in range(web.n):
        acc = web.field.const(0)
        for mu in range(web.n):
            v = web.variables[mu]
            acc = scalar_add(
                acc,
                scalar_sub(
                    scalar_mul(X[mu], web.field.diff(Y[lam], v)),
                    scalar_mul(Y[mu], web.field.diff(X[lam], v)),
                ),
            )
        out.append(acc)
    return out


def bracket_test(web: Web, i: int, j: int, seed: int = 0) -> bool:
    """True iff [X_i, X_j] stays in the span of X_i and X_j.

    Symbolic rank for rational webs; majority of numeric ranks at 3 points
    otherwise (the criterion is generic).
    """
    if web.q != web.n - 1:
        raise WrongCodimension("bracket test needs q = n-1")
    if i == j:
        raise ValueError("need two distinct foliations")
    X = tangent_fields(web)
    rows = [X[i], X[j], _lie_bracket(web, X[i], X[j])]
    if web.is_rational:
        M = SymbolicMatrix(web.field, [list(r) for r in rows])
        return rank_symbolic(M) <= 2
    points = web.sample_points(3, seed=seed)
    votes = 0
    for pt in points:
        if _rank_at(web, rows, pt) <= 2:
            votes += 1
    return votes * 2 > len(points)


def is_affine(web: Web) -> bool:
    """All generators of degree <= 1 in canonical polynomial form."""
    if not web.is_rational:
        return False
    for gens in web._gens:
        for g in gens:
            if not g.is_polynomial() or g.num.degree() > 1:
                return False
    return True


def web_from_dict(data: dict) -> Web:
    try:
        name = data.get("name", "web")
        variables = data["variables"]
        n = data.get("dimension", len(variables))
        if n != len(variables):
            raise WebValidationError(
                f"dimension {n} does not match {len(variables)} variables"
            )
        q = data["codimension"]
        foliations = [
            Foliation(tuple(parse_expression(s) for s in f["generators"]))
            for f in data["foliations"]
        ]
    except KeyError as exc:
        raise WebValidationError(f"missing web field {exc}") from exc
    return Web(name, variables, q, foliations)


def web_to_dict(web: Web) -> dict:
    return {
        "name": web.name,
        "dimension": web.n,
        "codimension": web.q,
        "variables": list(web.variables),
        "foliations": [
            {"generators": [expr_str(g) for g in f.generators]} for f in web.foliations
        ],
    }


def load_web(path: str) -> Web:
    with open(path, "r", encoding="utf-8") as fh:
        return web_from_dict(json.load(fh))
