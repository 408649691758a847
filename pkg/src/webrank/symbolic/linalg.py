"""Matrices with symbolic entries: fraction-free rank, kernel, solve, det.

Symbolic mode works over the rational-function field via Bareiss-style
fraction-free elimination (denominators cleared per row first, every
division exact).  Point modes evaluate the entries and eliminate over
Fraction (exact) or mpmath big-floats with a scaled pivot threshold.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

import mpmath

from .expr import Expr
from .field import ExactField, Scalar, TreeField, scalar_add, scalar_mul
from .poly import (
    DivisionByZero,
    Polynomial,
    RationalFunction,
    _frac_gcd,
    divexact,
    poly_gcd,
)

__all__ = [
    "SymbolicMatrix",
    "InconsistentSystem",
    "SingularMatrix",
    "NonSquareMatrix",
    "rank_symbolic",
    "kernel_basis_symbolic",
    "solve_symbolic",
    "det_symbolic",
    "eval_matrix",
    "rank_of_rows_exact",
    "rank_of_rows_mpf",
    "kernel_basis_exact_rows",
    "matvec",
]

DEFAULT_DIGITS = 50
DEFAULT_TOLERANCE = "1e-20"


class InconsistentSystem(ArithmeticError):
    pass


class SingularMatrix(ArithmeticError):
    pass


class NonSquareMatrix(ValueError):
    pass


class SymbolicMatrix:
    """Dense matrix of field scalars with labelled rows and columns."""

    def __init__(self, field, entries: List[List[Scalar]], row_labels=None, col_labels=None):
        self.field = field
        self.entries = entries
        self.nrows = len(entries)
        self.ncols = len(entries[0]) if entries else 0
        self.row_labels = row_labels if row_labels is not None else list(range(self.nrows))
        self.col_labels = col_labels if col_labels is not None else list(range(self.ncols))

    @classmethod
    def from_rows(cls, field, rows, row_labels=None, col_labels=None):
        return cls(field, [list(r) for r in rows], row_labels, col_labels)

    def drop_row(self, i: int) -> "SymbolicMatrix":
        return SymbolicMatrix(
            self.field,
            [row[:] for j, row in enumerate(self.entries) if j != i],
            [lab for j, lab in enumerate(self.row_labels) if j != i],
            list(self.col_labels),
        )

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def dump(self) -> dict:
        """Debug dump: dense entry strings keyed by label pair."""
        return {
            f"{rl}|{cl}": self.field.to_string(self.entries[i][j])
            for i, rl in enumerate(self.row_labels)
            for j, cl in enumerate(self.col_labels)
        }


def _require_exact(M: SymbolicMatrix) -> None:
    if not isinstance(M.field, ExactField):
        raise TypeError("symbolic mode requires rational-only entries")


def _cleared_poly_rows(M: SymbolicMatrix, rhs: Optional[Sequence[RationalFunction]] = None):
    """Clear denominators row by row; returns polynomial rows (+ multipliers)."""
    vars = M.field.vars
    one = Polynomial.const(vars, 1)
    rows = []
    multipliers = []
    for i, row in enumerate(M.entries):
        full = list(row) + ([rhs[i]] if rhs is not None else [])
        lcm = one
        for s in full:
            if s.den.is_const():
                continue
            g = poly_gcd(lcm, s.den)
            lcm = divexact(lcm * s.den, g) if not g.is_const() else lcm * s.den
        cleared = []
        for s in full:
            factor = divexact(lcm, s.den) if not s.den.is_const() else lcm.scale(
                1 / s.den.const_value()
            )
            cleared.append(s.num * factor)
        rows.append(cleared)
        multipliers.append(lcm)
    return rows, multipliers


def _bareiss_echelon(rows: List[List[Polynomial]], pivot_cols_limit: int):
    """In-place fraction-free echelon; returns (pivots, sign)."""
    if not rows:
        return [], 1
    vars = rows[0][0].vars if rows[0] else ()
    one = Polynomial.const(vars, 1)
    zero = Polynomial.zero(vars)
    nrows = len(rows)
    width = len(rows[0])
    prev = one
    sign = 1
    pivots = []
    r = 0
    for c in range(pivot_cols_limit):
        piv = next((i for i in range(r, nrows) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
            sign = -sign
        pr = rows[r]
        for i in range(r + 1, nrows):
            ri = rows[i]
            head = ri[c]
            if head.is_zero():
                if prev is not one:
                    for j in range(c + 1, width):
                        ri[j] = divexact(ri[j] * pr[c], prev)
                else:
                    for j in range(c + 1, width):
                        ri[j] = ri[j] * pr[c]
                continue
            for j in range(c + 1, width):
                ri[j] = divexact(ri[j] * pr[c] - head * pr[j], prev)
            ri[c] = zero
        prev = pr[c]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    return pivots, sign


def _bareiss_gauss_jordan(rows: List[List[Polynomial]], pivot_cols_limit: int):
    """One-step fraction-free Gauss-Jordan (Nakos-Turner-Williams).

    Eliminates above and below each pivot with exact divisions; afterwards
    every pivot row r with pivot column c satisfies rows[r][c] = D (the last
    pivot) and rows[r][c'] = 0 for the other pivot columns.  Returns
    (pivots, sign, D).
    """
    if not rows:
        return [], 1, None
    vars = rows[0][0].vars if rows[0] else ()
    one = Polynomial.const(vars, 1)
    zero = Polynomial.zero(vars)
    nrows = len(rows)
    width = len(rows[0])
    prev = one
    sign = 1
    pivots = []
    r = 0
    for c in range(pivot_cols_limit):
        piv = next((i for i in range(r, nrows) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
            sign = -sign
        pr = rows[r]
        for i in range(nrows):
            if i == r:
                continue
            ri = rows[i]
            head = ri[c]
            if head.is_zero():
                for j in range(width):
                    if j != c and not ri[j].is_zero():
                        ri[j] = divexact(ri[j] * pr[c], prev)
            else:
                for j in range(width):
                    if j != c:
                        ri[j] = divexact(ri[j] * pr[c] - head * pr[j], prev)
                ri[c] = zero
        prev = pr[c]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    # scale earlier pivot rows so every pivot equals the final divisor
    for r, c in pivots:
        pr = rows[r]
        if pr[c] == prev:
            continue
        for j in range(width):
            if j != c and not pr[j].is_zero():
                pr[j] = divexact(pr[j] * prev, pr[c])
        pr[c] = prev
    return pivots, sign, prev


def rank_symbolic(M: SymbolicMatrix) -> int:
    """Rank over the rational-function field."""
    _require_exact(M)
    if M.ncols == 0 or M.nrows == 0:
        return 0
    rows, _ = _cleared_poly_rows(M)
    pivots, _ = _bareiss_echelon(rows, M.ncols)
    return len(pivots)


def kernel_basis_symbolic(M: SymbolicMatrix) -> List[List[RationalFunction]]:
    """Deterministic echelon kernel, denominators cleared, primitive entries."""
    _require_exact(M)
    vars = M.field.vars
    rows, _ = _cleared_poly_rows(M)
    pivots, _, divisor = _bareiss_gauss_jordan(rows, M.ncols)
    pivot_cols = {c for _, c in pivots}
    basis = []
    for f in range(M.ncols):
        if f in pivot_cols:
            continue
        # pivot rows read D * x_c + rows[r][f] * x_f = 0; set x_f = D
        polys = [Polynomial.zero(vars)] * M.ncols
        polys[f] = divisor if divisor is not None else Polynomial.const(vars, 1)
        for r, c in pivots:
            polys[c] = -rows[r][f]
        vec = [RationalFunction(p, _reduced=True) for p in polys]
        basis.append(_clear_vector(vec, positive_at=f))
    return basis


def _clear_vector(vec: List[RationalFunction], positive_at: Optional[int] = None):
    """Scale an RF vector to primitive polynomial entries (as RFs)."""
    vars = vec[0].vars
    one = Polynomial.const(vars, 1)
    lcm = one
    for s in vec:
        if s.den.is_const():
            continue
        g = poly_gcd(lcm, s.den)
        lcm = divexact(lcm * s.den, g) if not g.is_const() else lcm * s.den
    polys = []
    for s in vec:
        factor = divexact(lcm, s.den) if not s.den.is_const() else lcm.scale(
            1 / s.den.const_value()
        )
        polys.append(s.num * factor)
    g = Polynomial.zero(vars)
    for p in polys:
        if not p.is_zero():
            g = p if g.is_zero() else poly_gcd(g, p)
            if g.is_const():
                break
    if not g.is_zero() and not g.is_const():
        polys = [divexact(p, g) if not p.is_zero() else p for p in polys]
    content = Fraction(0)
    for p in polys:
        if not p.is_zero():
            content = _frac_gcd(content, p.content())
    if content not in (0, 1):
        polys = [p.scale(1 / content) for p in polys]
    if positive_at is not None and not polys[positive_at].is_zero():
        if polys[positive_at].leading()[1] < 0:
            polys = [-p for p in polys]
    return [RationalFunction(p, _reduced=True) for p in polys]


def solve_symbolic(
    M: SymbolicMatrix, rhs: Sequence[RationalFunction], require_unique: bool = False
) -> List[RationalFunction]:
    """One solution of M x = rhs (free unknowns set to 0)."""
    _require_exact(M)
    vars = M.field.vars
    rows, _ = _cleared_poly_rows(M, rhs=list(rhs))
    pivots, _, divisor = _bareiss_gauss_jordan(rows, M.ncols)
    for i in range(len(pivots), M.nrows):
        if not rows[i][M.ncols].is_zero():
            raise InconsistentSystem("system has no solution")
    if require_unique and len(pivots) < M.ncols:
        raise SingularMatrix(
            f"rank {len(pivots)} < unknowns {M.ncols}; solution not unique"
        )
    x = [RationalFunction.const(vars, 0)] * M.ncols
    for r, c in pivots:
        x[c] = RationalFunction(rows[r][M.ncols], divisor)
    return x


def det_symbolic(M: SymbolicMatrix):
    """Exact determinant (fraction-free for rational entries, cofactor for trees)."""
    if not M.is_square():
        raise NonSquareMatrix(f"determinant of a {M.nrows}x{M.ncols} matrix")
    if isinstance(M.field, TreeField):
        return _det_cofactor(M.field, M.entries)
    _require_exact(M)
    vars = M.field.vars
    if M.nrows == 0:
        return RationalFunction.const(vars, 1)
    rows, multipliers = _cleared_poly_rows(M)
    pivots, sign = _bareiss_echelon(rows, M.ncols)
    if len(pivots) < M.nrows:
        return RationalFunction.const(vars, 0)
    det = RationalFunction(rows[-1][-1], _reduced=True)
    if sign < 0:
        det = -det
    denom = RationalFunction.const(vars, 1)
    for m in multipliers:
        denom = denom * RationalFunction(m, _reduced=True)
    return det / denom


def _det_cofactor(field, entries):
    n = len(entries)
    if n == 1:
        return entries[0][0]
    from .expr import ediv, emul, esub, eadd, eneg, Const

    total = Const(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in entries[1:]]
        term = emul(entries[0][j], _det_cofactor(field, minor))
        total = eadd(total, term) if j % 2 == 0 else esub(total, term)
    return total


def matvec(M: SymbolicMatrix, vec: Sequence[Scalar]) -> List[Scalar]:
    out = []
    for row in M.entries:
        acc = M.field.const(0)
        for a, b in zip(row, vec):
            acc = scalar_add(acc, scalar_mul(a, b))
        out.append(acc)
    return out


def eval_matrix(M: SymbolicMatrix, point, backend: str = "exact", digits: int = DEFAULT_DIGITS):
    """Evaluate all entries at a point; Fraction or mpf rows."""
    if backend == "exact":
        return [
            [M.field.eval_exact(s, point) for s in row] for row in M.entries
        ]
    if backend == "bigfloat":
        with mpmath.workdps(digits):
            return [
                [M.field.eval_mpf(s, point, mpmath.mp) for s in row]
                for row in M.entries
            ]
    raise ValueError(f"unknown backend {backend!r}")


def rank_of_rows_exact(rows: List[List[Fraction]]) -> int:
    rows = [list(r) for r in rows]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        for i in range(r + 1, nrows):
            f = rows[i][c]
            if f:
                f *= inv
                for j in range(c, ncols):
                    rows[i][j] -= f * rows[r][j]
        r += 1
        if r == nrows:
            break
    return r


def rank_of_rows_mpf(rows, tolerance=DEFAULT_TOLERANCE, digits: int = DEFAULT_DIGITS) -> int:
    """Scaled-pivot elimination: a pivot counts only above tol * (row max)."""
    with mpmath.workdps(digits):
        tol = mpmath.mpf(tolerance)
        work = [[mpmath.mpf(x) for x in row] for row in rows]
        nrows = len(work)
        ncols = len(work[0]) if work else 0
        scales = [max((abs(x) for x in row), default=mpmath.mpf(0)) for row in work]
        alive = [i for i in range(nrows) if scales[i] > 0]
        rank = 0
        used = set()
        for c in range(ncols):
            best = None
            best_ratio = tol
            for i in alive:
                if i in used:
                    continue
                ratio = abs(work[i][c]) / scales[i]
                if ratio > best_ratio:
                    best_ratio = ratio
                    best = i
            if best is None:
                continue
            used.add(best)
            rank += 1
            for i in alive:
                if i in used:
                    continue
                f = work[i][c] / work[best][c]
                if f:
                    for j in range(c, ncols):
                        work[i][j] -= f * work[best][j]
        return rank


def kernel_basis_exact_rows(rows: List[List[Fraction]]) -> List[List[Fraction]]:
    """Echelon kernel of a Fraction matrix (used for integer Koszul kernels)."""
    work = [list(r) for r in rows]
    nrows = len(work)
    ncols = len(work[0]) if work else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if work[i][c] != 0), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = 1 / work[r][c]
        for j in range(c, ncols):
            work[r][j] *= inv
        for i in range(nrows):
            if i != r and work[i][c]:
                f = work[i][c]
                for j in range(c, ncols):
                    work[i][j] -= f * work[r][j]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    pivot_cols = {c for _, c in pivots}
    basis = []
    for f in range(ncols):
        if f in pivot_cols:
            continue
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for rr, cc in pivots:
            vec[cc] = -work[rr][f]
        basis.append(vec)
    return basis
