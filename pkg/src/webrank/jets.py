"""Jet linear systems of a web: coefficient tables, Koszul bases, blocks.

The trace-zero equations differentiated to order k form block matrices
P_h^(l) whose entries come from a two-term recurrence on multi-indices;
the closed variant re-expresses the unknown columns of each foliation in a
basis of closed top-degree symbols (kernel of the Koszul differential).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Dict, List, Sequence, Tuple

from .combinat import binom, c as c_dim, z as z_dim
from .symbolic import (
    ExactField,
    SymbolicMatrix,
    kernel_basis_exact_rows,
    multi_factorial,
    multi_indices,
    p_subsets,
    sub_unit,
    add_unit,
    zero_index,
)
from .symbolic.field import Scalar, scalar_add, scalar_mul
from .webmodel import Web, jacobian_minor

__all__ = [
    "m_coeffs",
    "n_coeffs_topdegree",
    "koszul_matrix",
    "closed_symbol_basis",
    "closed_jet_basis",
    "JetBlocks",
    "ClosedJetBlocks",
    "build_plain",
    "build_closed",
    "prolong_terms",
]


def m_coeffs(web: Web, i: int, J: Scalar, max_order: int) -> Dict[tuple, Scalar]:
    """Coefficient table M_L^K for foliation i and weight J, |K| <= |L| <= max_order.

    Each L is reached from its smallest positive slot; the recurrence adds
    the derivative of the same-K entry and the chain-rule terms from K-1_a.
    """
    n, q = web.n, web.q
    fld = web.field
    table: Dict[tuple, Scalar] = {(zero_index(n), zero_index(q)): J}
    for ell in range(1, max_order + 1):
        for L in multi_indices(n, ell):
            lam = next(j for j in range(n) if L[j] > 0)
            Lp = sub_unit(L, lam)
            var = web.variables[lam]
            for h in range(ell + 1):
                for K in multi_indices(q, h):
                    acc = None
                    if h < ell:
                        acc = fld.diff(table[(Lp, K)], var)
                    for alpha in range(q):
                        if K[alpha] == 0:
                            continue
                        term = scalar_mul(
                            table[(Lp, sub_unit(K, alpha))],
                            web.generator_derivative(i, alpha, lam),
                        )
                        acc = term if acc is None else scalar_add(acc, term)
                    table[(L, K)] = acc if acc is not None else fld.const(0)
    return table


def _contingency_tables(row_sums: Sequence[int], col_sums: Sequence[int]):
    """Nonnegative integer matrices with the given row and column sums."""
    if not row_sums:
        if all(s == 0 for s in col_sums):
            yield []
        return
    first, rest = row_sums[0], row_sums[1:]

    def rows_with_sum(total, caps):
        if not caps:
            if total == 0:
                yield ()
            return
        for take in range(min(total, caps[0]), -1, -1):
            for tail in rows_with_sum(total - take, caps[1:]):
                yield (take,) + tail

    for row in rows_with_sum(first, tuple(col_sums)):
        reduced = [s - t for s, t in zip(col_sums, row)]
        for tail in _contingency_tables(rest, reduced):
            yield [row] + tail


def n_coeffs_topdegree(web: Web, i: int, L: tuple, K: tuple) -> Scalar:
    """Top-degree coefficient with J=1, as a sum over contingency tables.

    A distinct product of |L| first derivatives (u_alpha)'_lambda with alpha
    multiplicities K and lambda multiplicities L is a q x n table T; it
    appears once per way of routing the l_lambda copies of d/dx_lambda into
    the q slots, i.e. with weight prod_lambda of l_lambda!/(prod_alpha of
    T[alpha][lambda]!).  Weight 1 per table, like weight 1 per ordered pair
    sequence, contradicts the recurrence, which is the defining oracle.
    """
    if sum(K) != sum(L):
        raise ValueError("top-degree coefficients need |K| = |L|")
    fld = web.field
    total = None
    for T in _contingency_tables(K, L):
        weight = 1
        for lam in range(web.n):
            weight *= factorial(L[lam])
            for alpha in range(web.q):
                weight //= factorial(T[alpha][lam])
        prod = fld.const(weight)
        for alpha in range(web.q):
            for lam in range(web.n):
                for _ in range(T[alpha][lam]):
                    prod = scalar_mul(prod, web.generator_derivative(i, alpha, lam))
        total = prod if total is None else scalar_add(total, prod)
    return total if total is not None else fld.const(0)


@lru_cache(maxsize=None)
def koszul_matrix(q: int, p: int, h: int) -> tuple:
    """Matrix of d_p: S^h (x) L^p -> S^(h-1) (x) L^(p+1) in q slot variables.

    Monomial-basis convention: d(x^L (x) dx_B) picks up the exponent as
    coefficient and the ascending-insertion sign.  Returns (rows, row_labels,
    col_labels); rows are Fraction lists.  p ranges over 0..q (p=0 appears in
    the acyclicity tests).
    """
    if not (0 <= p <= q) or h < 1:
        raise ValueError(f"koszul_matrix needs 0 <= p <= q, h >= 1, got ({q},{p},{h})")
    cols = [(B, L) for B in p_subsets(q, p) for L in multi_indices(q, h)]
    rows_idx = [
        (Bp, Lp) for Bp in p_subsets(q, p + 1) for Lp in multi_indices(q, h - 1)
    ]
    pos = {lab: r for r, lab in enumerate(rows_idx)}
    rows = [[Fraction(0)] * len(cols) for _ in rows_idx]
    for cidx, (B, L) in enumerate(cols):
        for lam in range(q):
            if L[lam] == 0 or lam in B:
                continue
            target = tuple(sorted(B + (lam,)))
            sign = (-1) ** sum(1 for b in B if b < lam)
            rows[pos[(target, sub_unit(L, lam))]][cidx] += sign * L[lam]
    return rows, rows_idx, cols


def _integer_primitive(vec: List[Fraction]) -> List[Fraction]:
    from math import gcd

    den = 1
    for v in vec:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [v * den for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v.numerator))
    if g > 1:
        ints = [v / g for v in ints]
    return ints


@lru_cache(maxsize=None)
def closed_symbol_basis(q: int, p: int, h: int) -> tuple:
    """Deterministic integer basis of ker d_p on S^h (x) L^p (monomial coords).

    Vectors are indexed by the (A, K) column order of koszul_matrix; for
    h = 0 the standard basis of L^p is returned, and for p = q the whole
    space (the differential lands in L^(q+1) = 0).
    """
    labels = [(A, K) for A in p_subsets(q, p) for K in multi_indices(q, h)]
    dim = len(labels)
    if h == 0 or p == q:
        basis = []
        for j in range(dim):
            v = [Fraction(0)] * dim
            v[j] = Fraction(1)
            basis.append(v)
        result = tuple(tuple(v) for v in basis)
    else:
        rows, _, cols = koszul_matrix(q, p, h)
        assert cols == labels
        basis = kernel_basis_exact_rows(rows)
        result = tuple(tuple(_integer_primitive(v)) for v in basis)
    expected = z_dim(q, p, h) if p >= 1 else None
    if expected is not None:
        assert len(result) == expected, (q, p, h, len(result), expected)
    return result


@lru_cache(maxsize=None)
def closed_jet_basis(q: int, p: int, h: int) -> tuple:
    """Closed-symbol basis in derivative coordinates: component (A,K) scaled by K!.

    Jet unknowns are derivative values, whose monomial coefficients carry a
    1/K!; the scaling makes the combined plain columns genuinely closed jets.
    """
    labels = [(A, K) for A in p_subsets(q, p) for K in multi_indices(q, h)]
    scaled = []
    for vec in closed_symbol_basis(q, p, h):
        scaled.append(
            tuple(
                comp * multi_factorial(K) for comp, (_, K) in zip(vec, labels)
            )
        )
    return tuple(scaled)


class JetBlocks:
    """Plain jet matrices of a web at degree p, orders 0..k."""

    variant = "plain"

    def __init__(self, web: Web, p: int, k: int):
        if not (1 <= p <= web.q):
            raise ValueError(f"need 1 <= p <= q, got p={p}, q={web.q}")
        if k < 0:
            raise ValueError("order k must be >= 0")
        self.web = web
        self.p = p
        self.k = k
        self.A_list = p_subsets(web.q, p)
        self.B_list = p_subsets(web.n, p)
        self._tables: Dict[tuple, Dict[tuple, Scalar]] = {}
        for i in range(web.d):
            for A in self.A_list:
                for B in self.B_list:
                    J = jacobian_minor(web, i, A, B)
                    self._tables[(i, A, B)] = m_coeffs(web, i, J, k)
        self._blocks: Dict[tuple, List[List[Scalar]]] = {}

    def rows_at(self, ell: int) -> int:
        return binom(self.web.n, self.p) * c_dim(self.web.n, ell)

    def cols_at(self, h: int) -> int:
        return self.web.d * binom(self.web.q, self.p) * c_dim(self.web.q, h)

    def max_rank_at(self, kk: int) -> int:
        return min(self.rows_at(kk), self.cols_at(kk))

    def row_labels(self, ell: int) -> List[tuple]:
        return [
            (B, L) for B in self.B_list for L in multi_indices(self.web.n, ell)
        ]

    def col_labels(self, h: int) -> List[tuple]:
        return [
            (i, A, K)
            for A in self.A_list
            for K in multi_indices(self.web.q, h)
            for i in range(self.web.d)
        ]

    def _entry(self, i: int, A: tuple, K: tuple, B: tuple, L: tuple) -> Scalar:
        return self._tables[(i, A, B)][(L, K)]

    def block(self, ell: int, h: int) -> List[List[Scalar]]:
        """Block P_h^(ell): rows (B,L) with |L|=ell, columns (i,A,K) with |K|=h."""
        key = (ell, h)
        cached = self._blocks.get(key)
        if cached is not None:
            return cached
        zero = self.web.field.const(0)
        if h > ell:
            rows = [[zero] * self.cols_at(h) for _ in range(self.rows_at(ell))]
        else:
            rows = [
                [self._entry(i, A, K, B, L) for (i, A, K) in self.col_labels(h)]
                for (B, L) in self.row_labels(ell)
            ]
        self._blocks[key] = rows
        return rows

    def P(self, kk: int) -> SymbolicMatrix:
        return SymbolicMatrix(
            self.web.field,
            [row[:] for row in self.block(kk, kk)],
            self.row_labels(kk),
            self.col_labels(kk),
        )

    def Q(self, kk: int) -> SymbolicMatrix:
        """Lower-order coupling at row-order kk: blocks h = 0..kk-1 side by side."""
        if kk < 1:
            raise ValueError("Q is defined for k >= 1")
        rows = [[] for _ in range(self.rows_at(kk))]
        labels = []
        for h in range(kk):
            blk = self.block(kk, h)
            for r, br in enumerate(blk):
                rows[r].extend(br)
            labels.extend(self.col_labels(h))
        return SymbolicMatrix(self.web.field, rows, self.row_labels(kk), labels)

    def M(self, kk: int) -> SymbolicMatrix:
        """Full block-lower-triangular system of all orders <= kk."""
        rows = []
        row_labels = []
        for ell in range(kk + 1):
            blocks = [self.block(ell, h) for h in range(kk + 1)]
            for r in range(self.rows_at(ell)):
                rows.append([x for blk in blocks for x in blk[r]])
            row_labels.extend(self.row_labels(ell))
        col_labels = [lab for h in range(kk + 1) for lab in self.col_labels(h)]
        return SymbolicMatrix(self.web.field, rows, row_labels, col_labels)

    def coords(self, up_to: int) -> List[tuple]:
        """Column coordinates of M(up_to), order by order."""
        return [lab for h in range(up_to + 1) for lab in self.col_labels(h)]


class ClosedJetBlocks(JetBlocks):
    """Closed-variant blocks: per-foliation columns in closed-symbol bases.

    All b(n,p)c(n,l) ambient rows are retained; rank comparisons use
    min(z(n,p,k), d*z(q,p,k)) as the maximum (dependent rows change neither
    ranks nor solution sets).
    """

    variant = "closed"

    def cols_at(self, h: int) -> int:
        return self.web.d * z_dim(self.web.q, self.p, h)

    def max_rank_at(self, kk: int) -> int:
        return min(z_dim(self.web.n, self.p, kk), self.cols_at(kk))

    def col_labels(self, h: int) -> List[tuple]:
        basis = closed_jet_basis(self.web.q, self.p, h)
        return [(i, "ker", h, j) for j in range(len(basis)) for i in range(self.web.d)]

    def block(self, ell: int, h: int) -> List[List[Scalar]]:
        key = (ell, h)
        cached = self._blocks.get(key)
        if cached is not None:
            return cached
        zero = self.web.field.const(0)
        if h > ell:
            rows = [[zero] * self.cols_at(h) for _ in range(self.rows_at(ell))]
        else:
            plain_cols = [
                (A, K) for A in self.A_list for K in multi_indices(self.web.q, h)
            ]
            basis = closed_jet_basis(self.web.q, self.p, h)
            fld = self.web.field
            rows = []
            for (B, L) in self.row_labels(ell):
                row = []
                for j in range(len(basis)):
                    for i in range(self.web.d):
                        acc = None
                        for comp, (A, K) in zip(basis[j], plain_cols):
                            if comp == 0:
                                continue
                            term = self._entry(i, A, K, B, L)
                            if comp != 1:
                                term = scalar_mul(fld.const(comp), term)
                            acc = term if acc is None else scalar_add(acc, term)
                        row.append(acc if acc is not None else zero)
                rows.append(row)
        self._blocks[key] = rows
        return rows


def build_plain(web: Web, p: int, k: int) -> JetBlocks:
    return JetBlocks(web, p, k)


def build_closed(web: Web, p: int, k: int) -> ClosedJetBlocks:
    return ClosedJetBlocks(web, p, k)


def prolong_terms(web: Web, i: int, A: tuple, K: tuple, lam: int) -> List[tuple]:
    """Chain rule: the lambda-derivative of coordinate (i,A,K) reads the
    order-(|K|+1) coordinates (i,A,K+1_alpha) with factors (u_{i,alpha})'_lam."""
    return [
        ((i, A, add_unit(K, alpha)), web.generator_derivative(i, alpha, lam))
        for alpha in range(web.q)
    ]
