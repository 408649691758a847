"""Expression trees: parsing, differentiation, evaluation, canonicalization.

The grammar (whitespace insignificant)::

    expr     := ('-')? term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := base ('^' nonneg-integer)?
    base     := rational | name | '(' expr ')'
              | ('sqrt'|'ln'|'atan') '(' expr ')'
    rational := integer | integer '/' positive-integer

Rational-only expressions convert to a RationalFunction canonical form; the
transcendental functions sqrt/ln/atan force the big-float backend.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence

from .poly import DivisionByZero, Polynomial, RationalFunction

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "ExactUnsupported",
    "DomainError",
    "ParseError",
    "parse_expression",
    "differentiate",
    "eval_exact",
    "eval_mpf",
    "substitute",
    "is_rational_expr",
    "expr_to_rf",
    "rf_to_expr",
    "expr_str",
]

FUNCTIONS = ("sqrt", "ln", "atan")


class ExactUnsupported(TypeError):
    """The exact backend met sqrt/ln/atan."""


class DomainError(ArithmeticError):
    """sqrt or ln of a non-positive argument."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class Expr:
    __slots__ = ()


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = Fraction(value)

    def __eq__(self, other):
        return isinstance(other, Const) and self.value == other.value

    def __hash__(self):
        return hash(("c", self.value))


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __eq__(self, other):
        return isinstance(other, Var) and self.name == other.name

    def __hash__(self):
        return hash(("v", self.name))


class _Binary(Expr):
    __slots__ = ("a", "b")

    def __init__(self, a: Expr, b: Expr):
        self.a = a
        self.b = b

    def __eq__(self, other):
        return type(self) is type(other) and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((type(self).__name__, self.a, self.b))


class Add(_Binary):
    __slots__ = ()


class Sub(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class Div(_Binary):
    __slots__ = ()


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        self.base = base
        self.exponent = exponent

    def __eq__(self, other):
        return (
            isinstance(other, Pow)
            and self.base == other.base
            and self.exponent == other.exponent
        )

    def __hash__(self):
        return hash(("p", self.base, self.exponent))


class Call(Expr):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: Expr):
        self.fn = fn
        self.arg = arg

    def __eq__(self, other):
        return isinstance(other, Call) and self.fn == other.fn and self.arg == other.arg

    def __hash__(self):
        return hash(("f", self.fn, self.arg))


_ZERO = Const(0)
_ONE = Const(1)


def _is_const(e: Expr, v=None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


def eadd(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def esub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def emul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0) or _is_const(b, 0):
        return _ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Mul(a, b)


def ediv(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1):
        return a
    if isinstance(b, Const) and b.value != 0:
        if isinstance(a, Const):
            return Const(a.value / b.value)
        if _is_const(a, 0):
            return _ZERO
    if _is_const(a, 0) and not _is_const(b, 0):
        return _ZERO
    return Div(a, b)


def epow(base: Expr, exponent: int) -> Expr:
    if exponent == 0:
        return _ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value**exponent)
    return Pow(base, exponent)


def eneg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    return esub(_ZERO, a)


def differentiate(e: Expr, var: str) -> Expr:
    if isinstance(e, Const):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if e.name == var else _ZERO
    if isinstance(e, Add):
        return eadd(differentiate(e.a, var), differentiate(e.b, var))
    if isinstance(e, Sub):
        return esub(differentiate(e.a, var), differentiate(e.b, var))
    if isinstance(e, Mul):
        return eadd(
            emul(differentiate(e.a, var), e.b), emul(e.a, differentiate(e.b, var))
        )
    if isinstance(e, Div):
        da, db = differentiate(e.a, var), differentiate(e.b, var)
        if _is_const(db, 0):
            return ediv(da, e.b)
        return ediv(esub(emul(da, e.b), emul(e.a, db)), epow(e.b, 2))
    if isinstance(e, Pow):
        return emul(
            emul(Const(e.exponent), epow(e.base, e.exponent - 1)),
            differentiate(e.base, var),
        )
    if isinstance(e, Call):
        du = differentiate(e.arg, var)
        if e.fn == "sqrt":
            return ediv(du, emul(Const(2), Call("sqrt", e.arg)))
        if e.fn == "ln":
            return ediv(du, e.arg)
        if e.fn == "atan":
            return ediv(du, eadd(_ONE, epow(e.arg, 2)))
    raise TypeError(f"cannot differentiate {e!r}")


def eval_exact(e: Expr, point: Mapping[str, Fraction]) -> Fraction:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return point[e.name]
    if isinstance(e, Add):
        return eval_exact(e.a, point) + eval_exact(e.b, point)
    if isinstance(e, Sub):
        return eval_exact(e.a, point) - eval_exact(e.b, point)
    if isinstance(e, Mul):
        return eval_exact(e.a, point) * eval_exact(e.b, point)
    if isinstance(e, Div):
        den = eval_exact(e.b, point)
        if den == 0:
            raise DivisionByZero(expr_str(e.b))
        return eval_exact(e.a, point) / den
    if isinstance(e, Pow):
        return eval_exact(e.base, point) ** e.exponent
    if isinstance(e, Call):
        raise ExactUnsupported(f"exact backend cannot evaluate {e.fn}")
    raise TypeError(f"cannot evaluate {e!r}")


def eval_mpf(e: Expr, point: Mapping[str, object], mp):
    """Evaluate at a point of mpf values (or Fractions, converted on the fly)."""
    if isinstance(e, Const):
        return mp.mpf(e.value.numerator) / e.value.denominator
    if isinstance(e, Var):
        v = point[e.name]
        if isinstance(v, Fraction):
            return mp.mpf(v.numerator) / v.denominator
        return v
    if isinstance(e, Add):
        return eval_mpf(e.a, point, mp) + eval_mpf(e.b, point, mp)
    if isinstance(e, Sub):
        return eval_mpf(e.a, point, mp) - eval_mpf(e.b, point, mp)
    if isinstance(e, Mul):
        return eval_mpf(e.a, point, mp) * eval_mpf(e.b, point, mp)
    if isinstance(e, Div):
        den = eval_mpf(e.b, point, mp)
        if den == 0:
            raise DivisionByZero(expr_str(e.b))
        return eval_mpf(e.a, point, mp) / den
    if isinstance(e, Pow):
        return eval_mpf(e.base, point, mp) ** e.exponent
    if isinstance(e, Call):
        arg = eval_mpf(e.arg, point, mp)
        if e.fn == "sqrt":
            if arg < 0:
                raise DomainError(f"sqrt of negative value {arg}")
            return mp.sqrt(arg)
        if e.fn == "ln":
            if arg <= 0:
                raise DomainError(f"ln of non-positive value {arg}")
            return mp.ln(arg)
        if e.fn == "atan":
            return mp.atan(arg)
    raise TypeError(f"cannot evaluate {e!r}")


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Add):
        return eadd(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Sub):
        return esub(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Mul):
        return emul(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Div):
        return ediv(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Pow):
        return epow(substitute(e.base, mapping), e.exponent)
    if isinstance(e, Call):
        return Call(e.fn, substitute(e.arg, mapping))
    raise TypeError(f"cannot substitute in {e!r}")


def is_rational_expr(e: Expr) -> bool:
    if isinstance(e, (Const, Var)):
        return True
    if isinstance(e, _Binary):
        return is_rational_expr(e.a) and is_rational_expr(e.b)
    if isinstance(e, Pow):
        return is_rational_expr(e.base)
    return False


def free_variables(e: Expr) -> set:
    if isinstance(e, Const):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, _Binary):
        return free_variables(e.a) | free_variables(e.b)
    if isinstance(e, Pow):
        return free_variables(e.base)
    if isinstance(e, Call):
        return free_variables(e.arg)
    raise TypeError(f"unknown node {e!r}")


def expr_to_rf(e: Expr, vars: tuple) -> RationalFunction:
    """Canonicalize a rational expression over the given variable order."""
    if isinstance(e, Const):
        return RationalFunction.const(vars, e.value)
    if isinstance(e, Var):
        return RationalFunction.variable(vars, e.name)
    if isinstance(e, Add):
        return expr_to_rf(e.a, vars) + expr_to_rf(e.b, vars)
    if isinstance(e, Sub):
        return expr_to_rf(e.a, vars) - expr_to_rf(e.b, vars)
    if isinstance(e, Mul):
        return expr_to_rf(e.a, vars) * expr_to_rf(e.b, vars)
    if isinstance(e, Div):
        return expr_to_rf(e.a, vars) / expr_to_rf(e.b, vars)
    if isinstance(e, Pow):
        return expr_to_rf(e.base, vars) ** e.exponent
    if isinstance(e, Call):
        raise ExactUnsupported(f"{e.fn} has no rational canonical form")
    raise TypeError(f"unknown node {e!r}")


def rf_to_expr(rf: RationalFunction) -> Expr:
    def poly_expr(p: Polynomial) -> Expr:
        out: Expr = _ZERO
        for m, coeff in p.sorted_terms():
            term: Expr = Const(coeff)
            for v, e in zip(p.vars, m):
                if e:
                    term = emul(term, epow(Var(v), e))
            out = eadd(out, term)
        return out

    num = poly_expr(rf.num)
    if rf.den.is_const() and rf.den.const_value() == 1:
        return num
    return ediv(num, poly_expr(rf.den))


_PRECEDENCE = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3}


def expr_str(e: Expr) -> str:
    def wrap(child: Expr, parent_prec: int, right: bool = False) -> str:
        s = expr_str(child)
        prec = _PRECEDENCE.get(type(child), 4)
        if isinstance(child, Const) and child.value < 0:
            prec = 0
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({s})"
        return s

    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        return f"{wrap(e.a, 1)} + {wrap(e.b, 1)}"
    if isinstance(e, Sub):
        return f"{wrap(e.a, 1)} - {wrap(e.b, 1, right=True)}"
    if isinstance(e, Mul):
        return f"{wrap(e.a, 2)}*{wrap(e.b, 2)}"
    if isinstance(e, Div):
        return f"{wrap(e.a, 2)}/{wrap(e.b, 2, right=True)}"
    if isinstance(e, Pow):
        return f"{wrap(e.base, 4)}^{e.exponent}"
    if isinstance(e, Call):
        return f"{e.fn}({expr_str(e.arg)})"
    raise TypeError(f"unknown node {e!r}")


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], line, col))
            col += j - i
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], line, col))
            col += j - i
            i = j
        elif ch in "+-*/^()":
            tokens.append(_Token(ch, ch, line, col))
            col += 1
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {self.tok.text or 'end of input'!r}",
                self.tok.line,
                self.tok.col,
            )
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            raise ParseError(
                f"unexpected trailing {self.tok.text!r}", self.tok.line, self.tok.col
            )
        return e

    def expr(self) -> Expr:
        if self.tok.kind == "-":
            self.advance()
            e = eneg(self.term())
        else:
            e = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.term()
            e = eadd(e, rhs) if op == "+" else esub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            rhs = self.factor()
            e = emul(e, rhs) if op == "*" else ediv(e, rhs)
        return e

    def factor(self) -> Expr:
        e = self.base()
        if self.tok.kind == "^":
            self.advance()
            t = self.expect("int")
            e = epow(e, int(t.text))
        return e

    def base(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Const(int(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                if self.tok.kind != "(":
                    raise ParseError(
                        f"function {t.text!r} needs an argument list", t.line, t.col
                    )
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            return Var(t.text)
        if t.kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(
            f"expected a value, found {t.text or 'end of input'!r}", t.line, t.col
        )


def parse_expression(text: str) -> Expr:
    return _Parser(text).parse()
