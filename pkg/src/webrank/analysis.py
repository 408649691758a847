"""Ordinarity decisions, rank profiles, bound reports, relation verification.

Rational webs get decisive symbolic (generic) ranks plus per-point observed
values; transcendental webs are sampled with the big-float backend, and a
rank below the maximum at every point yields a not-ordinary verdict (the
paper's own reading of such evidence).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from . import combinat
from .jets import ClosedJetBlocks, JetBlocks, build_closed, build_plain
from .symbolic import (
    DomainError,
    DivisionByZero,
    ExactUnsupported,
    Expr,
    PointSampler,
    PointSelectionFailed,
    SymbolicMatrix,
    differentiate,
    eval_mpf,
    expr_str,
    expr_to_rf,
    is_rational_expr,
    p_subsets,
    parse_expression,
    rank_of_rows_exact,
    rank_of_rows_mpf,
    rank_symbolic,
    substitute,
)
from .symbolic.linalg import DEFAULT_DIGITS, DEFAULT_TOLERANCE
from .symbolic.multiindex import multi_indices, sub_unit
from .webmodel import Web, bracket_test, jacobian_minor

__all__ = [
    "OrderRecord",
    "OrdinarityReport",
    "RelationSpec",
    "RelationVerdict",
    "CompositionDomainError",
    "rank_profile",
    "is_p_ordinary",
    "is_strongly_p_ordinary",
    "bound_report",
    "verify_relation",
    "verify_cobord",
    "relation_from_dict",
    "load_relation",
    "relation_jet",
]

ZERO_THRESHOLD = "1e-30"
ZERO_TEST_POINTS = 5

_EXPR_ZERO = parse_expression("0")


class CompositionDomainError(ArithmeticError):
    """A composed relation component could not be evaluated at any test point."""


# ---------------------------------------------------------------------------
# rank machinery


def _matrix_rank_at(M: SymbolicMatrix, point, backend: str, digits: int, tolerance) -> int:
    if backend == "exact":
        rows = [[M.field.eval_exact(s, point) for s in row] for row in M.entries]
        return rank_of_rows_exact(rows)
    with mpmath.workdps(digits):
        rows = [[M.field.eval_mpf(s, point, mpmath.mp) for s in row] for row in M.entries]
    return rank_of_rows_mpf(rows, tolerance=tolerance, digits=digits)


def _ranks_with_retry(
    M: SymbolicMatrix,
    web: Web,
    points: List[dict],
    backend: str,
    digits: int,
    tolerance,
    max_retries: int = 10,
) -> List[int]:
    """Rank of M at each point; points that fail to evaluate are replaced."""
    out = []
    spare = web.sampler(seed=7919)
    for pt in points:
        tries = 0
        current = pt
        while True:
            try:
                out.append(_matrix_rank_at(M, current, backend, digits, tolerance))
                break
            except (DomainError, DivisionByZero):
                tries += 1
                if tries > max_retries:
                    raise PointSelectionFailed(
                        "matrix evaluation kept failing at sampled points"
                    )
                current = spare.point(web.admissible)
                pt.clear()
                pt.update(current)
    return out


@dataclass
class OrderRecord:
    k: int
    rows: int
    cols: int
    max_rank: int
    point_ranks: List[int]
    symbolic_rank: Optional[int]
    m_point_ranks: List[int] = dc_field(default_factory=list)
    m_symbolic_rank: Optional[int] = None
    rho: Optional[int] = None

    @property
    def attained(self) -> bool:
        if self.symbolic_rank is not None:
            return self.symbolic_rank == self.max_rank
        return any(r == self.max_rank for r in self.point_ranks)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "rows": self.rows,
            "cols": self.cols,
            "max_rank": self.max_rank,
            "point_ranks": self.point_ranks,
            "symbolic_rank": self.symbolic_rank,
            "m_point_ranks": self.m_point_ranks,
            "m_symbolic_rank": self.m_symbolic_rank,
            "rho": self.rho,
            "attained": self.attained,
        }


@dataclass
class OrdinarityReport:
    p: int
    variant: str
    verdict: str
    horizon: int
    records: List[OrderRecord]
    bracket_pair: Optional[Tuple[int, int]] = None
    routed_to_closed: bool = False
    points: List[dict] = dc_field(default_factory=list)

    @property
    def ordinary(self) -> bool:
        return self.verdict == "ordinary"

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "variant": self.variant,
            "verdict": self.verdict,
            "horizon": self.horizon,
            "records": [r.as_dict() for r in self.records],
            "bracket_pair": list(self.bracket_pair) if self.bracket_pair else None,
            "routed_to_closed": self.routed_to_closed,
            "points": [_point_dict(pt) for pt in self.points],
        }


def _point_dict(pt) -> dict:
    return {k: str(v) for k, v in sorted(pt.items())}


def _resolve_points(web: Web, points, count: int, seed: int):
    if points is not None:
        return [dict(p) for p in points]
    return web.sample_points(count, seed=seed)


_SYMBOLIC_SIZE_LIMIT = 300


def _symbolic_rank_feasible(web: Web, M) -> bool:
    """Fraction-free elimination entry growth makes large polynomial matrices
    impractical; constant-entry matrices (affine webs) are fine at any size."""
    if not web.is_rational:
        return False
    if M.nrows * M.ncols <= _SYMBOLIC_SIZE_LIMIT:
        return True
    return all(s.is_const() or s.is_zero() for row in M.entries for s in row)


def rank_profile(
    web: Web,
    p: int,
    k_max: int,
    closed: bool = False,
    points: Optional[List[dict]] = None,
    count: int = 3,
    seed: int = 0,
    backend: Optional[str] = None,
    digits: int = DEFAULT_DIGITS,
    tolerance=DEFAULT_TOLERANCE,
    with_m: bool = True,
) -> List[OrderRecord]:
    """Observed ranks of P_k (or its closed analogue) and M_k for k <= k_max."""
    backend = backend or ("exact" if web.is_rational else "bigfloat")
    points = _resolve_points(web, points, count, seed)
    blocks = build_closed(web, p, k_max) if closed else build_plain(web, p, k_max)
    records = []
    for k in range(k_max + 1):
        P = blocks.P(k)
        rec = OrderRecord(
            k=k,
            rows=blocks.rows_at(k),
            cols=blocks.cols_at(k),
            max_rank=blocks.max_rank_at(k),
            point_ranks=_ranks_with_retry(P, web, points, backend, digits, tolerance),
            symbolic_rank=rank_symbolic(P) if _symbolic_rank_feasible(web, P) else None,
        )
        if with_m:
            M = blocks.M(k)
            rec.m_point_ranks = _ranks_with_retry(
                M, web, points, backend, digits, tolerance
            )
            rec.m_symbolic_rank = (
                rank_symbolic(M) if _symbolic_rank_feasible(web, M) else None
            )
            alpha = sum(blocks.cols_at(h) for h in range(k + 1))
            m_rank = (
                rec.m_symbolic_rank
                if rec.m_symbolic_rank is not None
                else max(rec.m_point_ranks)
            )
            rec.rho = alpha - m_rank
        records.append(rec)
    return records


def _ordinarity(
    web: Web,
    p: int,
    closed: bool,
    points,
    count: int,
    seed: int,
    digits: int,
    tolerance,
) -> OrdinarityReport:
    n, q, d = web.n, web.q, web.d
    variant = "closed" if closed else "plain"
    if closed:
        k_thr = combinat.k_one(n, d, q, p)
        calibrated = combinat.is_strongly_calibrated(n, d, q, p)
    else:
        k_thr = combinat.k_zero(n, d, q, p)
        calibrated = combinat.is_calibrated(n, d, q, p)
    horizon = 0 if k_thr is None else (k_thr if calibrated else k_thr + 1)

    bracket_pair = None
    if q == n - 1 and p <= n - 2:
        for i in range(d):
            for j in range(i + 1, d):
                if bracket_test(web, i, j, seed=seed):
                    bracket_pair = (i, j)
                    break
            if bracket_pair:
                break

    points = _resolve_points(web, points, count, seed)
    # once the bracket criterion fires the verdict is decided; profile only
    # the cheap low orders for the report
    profile_to = min(horizon, 1) if bracket_pair is not None else horizon
    records = rank_profile(
        web,
        p,
        profile_to,
        closed=closed,
        points=points,
        seed=seed,
        digits=digits,
        tolerance=tolerance,
        with_m=False,
    )
    if bracket_pair is not None:
        verdict = "not_ordinary"
    elif all(rec.attained for rec in records):
        verdict = "ordinary"
    elif web.is_rational:
        verdict = "not_ordinary"
    else:
        # transcendental: every sampled point stayed below the maximum
        failed = [rec for rec in records if not rec.attained]
        consistent = all(
            len(set(rec.point_ranks)) == 1 for rec in failed
        )
        verdict = "not_ordinary" if consistent else "undetermined_at_points"
    return OrdinarityReport(
        p=p,
        variant=variant,
        verdict=verdict,
        horizon=horizon,
        records=records,
        bracket_pair=bracket_pair,
        points=points,
    )


def is_p_ordinary(
    web: Web,
    p: int,
    points: Optional[List[dict]] = None,
    count: int = 3,
    seed: int = 0,
    digits: int = DEFAULT_DIGITS,
    tolerance=DEFAULT_TOLERANCE,
) -> OrdinarityReport:
    """Rank-maximality of P_k for k up to the Thm-4 horizon.

    p = q is routed to the strong variant: the plain equation count is then
    redundant and the case belongs to the closed theory.
    """
    if p == web.q:
        rep = _ordinarity(web, p, True, points, count, seed, digits, tolerance)
        rep.routed_to_closed = True
        return rep
    return _ordinarity(web, p, False, points, count, seed, digits, tolerance)


def is_strongly_p_ordinary(
    web: Web,
    p: int,
    points: Optional[List[dict]] = None,
    count: int = 3,
    seed: int = 0,
    digits: int = DEFAULT_DIGITS,
    tolerance=DEFAULT_TOLERANCE,
) -> OrdinarityReport:
    return _ordinarity(web, p, True, points, count, seed, digits, tolerance)


def bound_report(
    web: Web,
    p: int,
    points: Optional[List[dict]] = None,
    count: int = 3,
    seed: int = 0,
    digits: int = DEFAULT_DIGITS,
    tolerance=DEFAULT_TOLERANCE,
) -> dict:
    """Combinatorial bounds combined with the web's ordinarity verdicts."""
    profile = combinat.bound_profile(web.n, web.d, web.q, p)
    plain = is_p_ordinary(web, p, points, count, seed, digits, tolerance)
    strong = (
        plain
        if plain.variant == "closed"
        else is_strongly_p_ordinary(web, p, points, count, seed, digits, tolerance)
    )
    infinite = plain.bracket_pair is not None and p <= web.n - 2
    conclusions = {}
    if infinite:
        conclusions["r_p"] = "infinite"
        conclusions["r_tilde_p"] = "infinite"
    else:
        if plain.ordinary:
            conclusions["r_p"] = f"<= {profile.pi0}"
        if strong.ordinary:
            conclusions["r_tilde_p"] = f"<= {profile.pi_prime}"
    return {
        "bounds": profile.as_dict(),
        "plain": plain.as_dict(),
        "closed": strong.as_dict(),
        "conclusions": conclusions,
    }


# ---------------------------------------------------------------------------
# relation verification


@dataclass
class RelationSpec:
    """Degree-p basic forms, one per foliation, in slot variables u1..uq.

    components[i] maps a p-subset of slot indices (0-based tuple) to the
    coefficient expression of du_{A}.
    """

    p: int
    components: Dict[int, Dict[tuple, Expr]]

    def component(self, i: int, A: tuple) -> Expr:
        return self.components.get(i, {}).get(A, _EXPR_ZERO)


@dataclass
class RelationVerdict:
    is_abelian: bool
    is_closed: bool
    residuals: Dict[str, str]
    mode: str

    def as_dict(self) -> dict:
        return {
            "is_abelian": self.is_abelian,
            "is_closed": self.is_closed,
            "residuals": self.residuals,
            "mode": self.mode,
        }


def relation_from_dict(data: dict, q: int) -> RelationSpec:
    p = data["p"]
    comps: Dict[int, Dict[tuple, Expr]] = {}
    for form in data.get("forms", []):
        i = form["foliation"] - 1
        if i < 0:
            raise ValueError("foliation indices are 1-based")
        comps[i] = {}
        for key, text in form.get("components", {}).items():
            A = tuple(int(s) - 1 for s in key.split(","))
            if len(A) != p or any(a < 0 or a >= q for a in A) or list(A) != sorted(set(A)):
                raise ValueError(f"bad component subset {key!r} for p={p}, q={q}")
            comps[i][A] = parse_expression(text)
    return RelationSpec(p=p, components=comps)


def load_relation(path: str, q: int) -> RelationSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return relation_from_dict(json.load(fh), q)


def slot_names(q: int) -> Tuple[str, ...]:
    return tuple(f"u{a + 1}" for a in range(q))


def _expr_zero_test(exprs: List[Expr], variables: Sequence[str], seed: int = 0):
    """Exact zero for rational expressions, else 5-point high-precision test.

    Returns (all_zero, residuals dict, mode).
    """
    residuals: Dict[str, str] = {}
    if all(is_rational_expr(e) for e in exprs):
        ok = True
        for idx, e in enumerate(exprs):
            rf = expr_to_rf(e, tuple(variables))
            if not rf.is_zero():
                ok = False
                residuals[str(idx)] = str(rf)
        return ok, residuals, "exact"
    sampler = PointSampler(variables, seed=seed)
    ok = True
    with mpmath.workdps(DEFAULT_DIGITS):
        threshold = mpmath.mpf(ZERO_THRESHOLD)
        for idx, e in enumerate(exprs):
            worst = mpmath.mpf(0)
            evaluated = 0
            attempts = 0
            while evaluated < ZERO_TEST_POINTS and attempts < 20 * ZERO_TEST_POINTS:
                attempts += 1
                pt = sampler.positive_unit_point()
                try:
                    val = abs(eval_mpf(e, pt, mpmath.mp))
                except (DomainError, DivisionByZero):
                    continue
                worst = max(worst, val)
                evaluated += 1
            if evaluated < ZERO_TEST_POINTS:
                raise CompositionDomainError(
                    f"component {idx} not evaluable at enough sample points"
                )
            if worst > threshold:
                ok = False
            residuals[str(idx)] = mpmath.nstr(worst, 5)
    return ok, residuals, "numeric"


def _compose(web: Web, rel: RelationSpec, i: int, A: tuple) -> Expr:
    mapping = {
        f"u{a + 1}": web.foliations[i].generators[a] for a in range(web.q)
    }
    return substitute(rel.component(i, A), mapping)


def _exterior_derivative_components(
    rel: RelationSpec, i: int, q: int
) -> Dict[tuple, Expr]:
    """d of the degree-p form of foliation i, as components on (p+1)-subsets."""
    from .symbolic.expr import eadd, eneg

    out: Dict[tuple, Expr] = {}
    names = slot_names(q)
    for Ap in p_subsets(q, rel.p + 1):
        total = _EXPR_ZERO
        for pos, alpha in enumerate(Ap):
            rest = tuple(a for a in Ap if a != alpha)
            term = differentiate(rel.component(i, rest), names[alpha])
            total = eadd(total, term if pos % 2 == 0 else eneg(term))
        out[Ap] = total
    return out


def verify_relation(web: Web, rel: RelationSpec, seed: int = 0) -> RelationVerdict:
    """Trace-zero check of the composed forms plus closedness in slot variables."""
    if not (1 <= rel.p <= web.q):
        raise ValueError(f"relation degree p={rel.p} outside 1..q={web.q}")
    for i in rel.components:
        if i >= web.d:
            raise ValueError(f"relation references foliation {i + 1} > d={web.d}")
    A_list = p_subsets(web.q, rel.p)
    traces = []
    from .symbolic.expr import eadd, emul

    minors_as_expr = _minor_exprs(web, rel.p)
    for B in p_subsets(web.n, rel.p):
        total = _EXPR_ZERO
        for i in range(web.d):
            for A in A_list:
                f = _compose(web, rel, i, A)
                total = eadd(total, emul(f, minors_as_expr[(i, A, B)]))
        traces.append(total)
    abelian, residuals, mode = _expr_zero_test(traces, web.variables, seed=seed)

    closed_ok = True
    closed_residuals: Dict[str, str] = {}
    if rel.p < web.q:
        names = slot_names(web.q)
        d_comps = []
        for i in range(web.d):
            d_comps.extend(_exterior_derivative_components(rel, i, web.q).values())
        closed_ok, closed_residuals, _ = _expr_zero_test(d_comps, names, seed=seed)
    residuals.update({f"d_{k}": v for k, v in closed_residuals.items()})
    return RelationVerdict(
        is_abelian=abelian, is_closed=closed_ok, residuals=residuals, mode=mode
    )


def _minor_exprs(web: Web, p: int) -> Dict[tuple, Expr]:
    """Jacobian minors recomputed at expression level (field-independent)."""
    from .symbolic.expr import eadd, emul, eneg, esub, Const

    dgens = [
        [[differentiate(g, v) for v in web.variables] for g in f.generators]
        for f in web.foliations
    ]

    def det(rows: List[List[Expr]]) -> Expr:
        if len(rows) == 1:
            return rows[0][0]
        total = Const(0)
        for j in range(len(rows)):
            minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
            term = emul(rows[0][j], det(minor))
            total = eadd(total, term) if j % 2 == 0 else esub(total, term)
        return total

    out = {}
    for i in range(web.d):
        for A in p_subsets(web.q, p):
            for B in p_subsets(web.n, p):
                out[(i, A, B)] = det([[dgens[i][a][b] for b in B] for a in A])
    return out


def verify_cobord(
    web: Web, eta: RelationSpec, omega: RelationSpec, seed: int = 0
) -> dict:
    """Checks d(eta_i) = omega_i per foliation, plus both relation verdicts."""
    if eta.p != omega.p - 1:
        raise ValueError(f"eta must have degree p-1={omega.p - 1}, got {eta.p}")
    from .symbolic.expr import esub

    diffs = []
    names = slot_names(web.q)
    for i in range(web.d):
        d_eta = _exterior_derivative_components(eta, i, web.q)
        for Ap in p_subsets(web.q, omega.p):
            diffs.append(esub(d_eta[Ap], omega.component(i, Ap)))
    matches, residuals, mode = _expr_zero_test(diffs, names, seed=seed)
    eta_verdict = verify_relation(web, eta, seed=seed)
    omega_verdict = verify_relation(web, omega, seed=seed)
    ok = (
        matches
        and eta_verdict.is_abelian
        and omega_verdict.is_abelian
        and omega_verdict.is_closed
    )
    return {
        "is_cobord": ok,
        "d_eta_matches_omega": matches,
        "eta": eta_verdict.as_dict(),
        "omega": omega_verdict.as_dict(),
        "residuals": residuals,
        "mode": mode,
    }


def relation_jet(web: Web, rel: RelationSpec, point: dict, k: int, digits: int = DEFAULT_DIGITS):
    """Jet coordinates w(i,A,K) of a relation at a point, orders 0..k.

    Slot derivatives of each component are evaluated at u_i(point); exact
    Fractions for rational data, mpf otherwise.  Ordered like the plain
    jet-matrix columns.
    """
    names = slot_names(web.q)
    rational = web.is_rational and all(
        is_rational_expr(e)
        for comps in rel.components.values()
        for e in comps.values()
    )
    values = []
    from .symbolic.expr import eval_exact as _ee

    with mpmath.workdps(digits):
        slot_points: Dict[int, dict] = {}
        for i in range(web.d):
            pt = {}
            for a in range(web.q):
                g = web.foliations[i].generators[a]
                if rational:
                    pt[names[a]] = _ee(g, point)
                else:
                    pt[names[a]] = eval_mpf(g, point, mpmath.mp)
            slot_points[i] = pt
        for h in range(k + 1):
            for A in p_subsets(web.q, rel.p):
                for K in multi_indices(web.q, h):
                    for i in range(web.d):
                        e = rel.component(i, A)
                        for slot, times in enumerate(K):
                            for _ in range(times):
                                e = differentiate(e, names[slot])
                        if rational:
                            values.append(_ee(e, slot_points[i]))
                        else:
                            values.append(eval_mpf(e, slot_points[i], mpmath.mp))
    return values
