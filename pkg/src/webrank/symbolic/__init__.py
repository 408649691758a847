"""Exact expression algebra and linear algebra backends."""

from .expr import (
    Call,
    Const,
    DomainError,
    ExactUnsupported,
    Expr,
    ParseError,
    Var,
    differentiate,
    eval_exact,
    eval_mpf,
    expr_str,
    expr_to_rf,
    free_variables,
    is_rational_expr,
    parse_expression,
    rf_to_expr,
    substitute,
)
from .field import ExactField, Scalar, TreeField, field_for
from .linalg import (
    DEFAULT_DIGITS,
    DEFAULT_TOLERANCE,
    InconsistentSystem,
    NonSquareMatrix,
    SingularMatrix,
    SymbolicMatrix,
    det_symbolic,
    eval_matrix,
    kernel_basis_exact_rows,
    kernel_basis_symbolic,
    matvec,
    rank_of_rows_exact,
    rank_of_rows_mpf,
    rank_symbolic,
    solve_symbolic,
)
from .multiindex import (
    MultiIndex,
    add_unit,
    degree,
    index_position,
    multi_factorial,
    multi_indices,
    p_subsets,
    sub_unit,
    zero_index,
)
from .poly import DivisionByZero, Polynomial, RationalFunction, divexact, poly_gcd
from .sample import PointSampler, PointSelectionFailed

__all__ = [name for name in dir() if not name.startswith("_")]
