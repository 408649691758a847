"""Symbolic and numeric matrix operations against independent oracles."""

import random
from fractions import Fraction

import pytest

from webrank.symbolic import (
    ExactField,
    InconsistentSystem,
    NonSquareMatrix,
    SingularMatrix,
    SymbolicMatrix,
    det_symbolic,
    eval_matrix,
    expr_to_rf,
    kernel_basis_symbolic,
    matvec,
    parse_expression,
    rank_of_rows_exact,
    rank_of_rows_mpf,
    rank_symbolic,
    solve_symbolic,
)

FLD = ExactField(("x", "y"))


def P(text):
    return expr_to_rf(parse_expression(text), FLD.vars)


def M(rows):
    return SymbolicMatrix(FLD, [[P(e) for e in row] for row in rows])


def test_rank_identity():
    assert rank_symbolic(M([["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])) == 3


def test_rank_function_field():
    assert rank_symbolic(M([["x", "x^2"], ["1", "x"]])) == 1
    assert rank_symbolic(M([["x", "x^2"], ["1", "y"]])) == 2


def test_kernel_identity_empty():
    assert kernel_basis_symbolic(M([["1", "0"], ["0", "1"]])) == []


def test_kernel_rank_nullity_oracle():
    rng = random.Random(3)
    for _ in range(10):
        rows = [
            [P(str(rng.randint(-4, 4))) for _ in range(6)] for _ in range(4)
        ]
        mat = SymbolicMatrix(FLD, rows)
        r = rank_symbolic(mat)
        basis = kernel_basis_symbolic(mat)
        assert len(basis) == 6 - r
        for vec in basis:
            assert all(v.is_zero() for v in matvec(mat, vec))


def test_kernel_with_function_entries():
    mat = M([["x", "x^2"]])
    [vec] = kernel_basis_symbolic(mat)
    # cleared of denominators and primitive: (-x, 1)
    assert [str(v) for v in vec] == ["-x", "1"]


def test_solve_residual_oracle():
    rng = random.Random(4)
    solved = 0
    while solved < 8:
        rows = [[P(str(rng.randint(-5, 5))) for _ in range(5)] for _ in range(5)]
        mat = SymbolicMatrix(FLD, rows)
        if rank_symbolic(mat) < 5:
            continue
        b = [P(str(rng.randint(-5, 5))) for _ in range(5)]
        x = solve_symbolic(mat, b, require_unique=True)
        assert all((r - bb).is_zero() for r, bb in zip(matvec(mat, x), b))
        solved += 1


def test_solve_inconsistent_and_singular():
    with pytest.raises(InconsistentSystem):
        solve_symbolic(M([["1"], ["1"]]), [P("1"), P("2")])
    with pytest.raises(SingularMatrix):
        solve_symbolic(M([["1", "1"]]), [P("1")], require_unique=True)


def test_det_cofactor_oracle():
    rng = random.Random(5)

    def cof_det(rows):
        n = len(rows)
        if n == 1:
            return rows[0][0]
        total = Fraction(0)
        for j in range(n):
            minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
            total += (-1) ** j * rows[0][j] * cof_det(minor)
        return total

    for _ in range(6):
        vals = [[rng.randint(-6, 6) for _ in range(4)] for _ in range(4)]
        mat = SymbolicMatrix(FLD, [[P(str(v)) for v in row] for row in vals])
        expected = cof_det([[Fraction(v) for v in row] for row in vals])
        got = det_symbolic(mat)
        assert got.is_const() and got.const_value() == expected


def test_det_symbolic_entries():
    assert str(det_symbolic(M([["x", "1"], ["y", "2"]]))) == "2*x - y"
    assert det_symbolic(M([["1/x", "1"], ["1", "x"]])).is_zero()
    with pytest.raises(NonSquareMatrix):
        det_symbolic(M([["x", "1", "0"], ["y", "2", "0"]]))


def test_symbolic_vs_point_rank_agreement():
    rng = random.Random(6)
    pool = ["x", "y", "x*y", "x^2-y", "1", "2*x+3", "0", "x/(y+2)"]
    for _ in range(8):
        rows = [[P(rng.choice(pool)) for _ in range(4)] for _ in range(3)]
        mat = SymbolicMatrix(FLD, rows)
        sym = rank_symbolic(mat)
        agreements = 0
        tries = 0
        while agreements < 3 and tries < 30:
            tries += 1
            pt = {
                "x": Fraction(rng.randint(-50, 50), rng.randint(1, 50)),
                "y": Fraction(rng.randint(-50, 50), rng.randint(1, 50)),
            }
            try:
                vals = eval_matrix(mat, pt, "exact")
            except ZeroDivisionError:
                continue
            except ArithmeticError:
                continue
            if rank_of_rows_exact(vals) == sym:
                agreements += 1
        assert agreements == 3


def test_mpf_rank_threshold():
    rows = [[1, 2], [1, 2 + 1e-30]]
    assert rank_of_rows_mpf(rows, tolerance="1e-20", digits=50) == 1
    rows = [[1, 2], [1, 2.5]]
    assert rank_of_rows_mpf(rows, tolerance="1e-20", digits=50) == 2
