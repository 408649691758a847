"""Exact multivariate polynomials and rational functions over Q.

Terms are exponent-tuple dicts (hot loops live in webrank._kernel); the
monomial order is graded lexicographic on the declared variable order.
Rational functions are kept fully reduced (primitive-PRS gcd) with a
primitive, positive-leading denominator, so structural equality decides
equality of rational expressions.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as int_gcd
from typing import Iterable, Optional, Sequence

from webrank._kernel import td_add, td_mul, td_scale, td_sub

__all__ = ["Polynomial", "RationalFunction", "poly_gcd", "divexact", "DivisionByZero"]


class DivisionByZero(ArithmeticError):
    """Evaluation hit a vanishing denominator; carries the subexpression."""

    def __init__(self, where: str):
        super().__init__(f"division by zero in {where}")
        self.where = where


def _grlex_key(m: tuple) -> tuple:
    return (sum(m), m)


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    if a == 0:
        return abs(b)
    if b == 0:
        return abs(a)
    num = int_gcd(a.numerator, b.numerator)
    den = a.denominator * b.denominator // int_gcd(a.denominator, b.denominator)
    return Fraction(num, den)


class Polynomial:
    __slots__ = ("vars", "terms")

    def __init__(self, vars: tuple, terms: dict, _clean: bool = False):
        self.vars = vars
        if _clean:
            self.terms = terms
        else:
            self.terms = {
                m: Fraction(c) for m, c in terms.items() if c
            }

    @classmethod
    def zero(cls, vars: tuple) -> "Polynomial":
        return cls(vars, {}, _clean=True)

    @classmethod
    def const(cls, vars: tuple, value) -> "Polynomial":
        value = Fraction(value)
        if not value:
            return cls.zero(vars)
        return cls(vars, {(0,) * len(vars): value}, _clean=True)

    @classmethod
    def variable(cls, vars: tuple, name: str) -> "Polynomial":
        i = vars.index(name)
        m = tuple(1 if j == i else 0 for j in range(len(vars)))
        return cls(vars, {m: Fraction(1)}, _clean=True)

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(not any(m) for m in self.terms)

    def const_value(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        [(m, c)] = self.terms.items()
        if any(m):
            raise ValueError("not a constant polynomial")
        return c

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((m[i] for m in self.terms), default=-1)

    def leading(self) -> tuple:
        m = max(self.terms, key=_grlex_key)
        return m, self.terms[m]

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.vars, td_add(self.terms, other.terms), _clean=True)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.vars, td_sub(self.terms, other.terms), _clean=True)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.vars, td_scale(self.terms, Fraction(-1)), _clean=True)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.vars, td_mul(self.terms, other.terms), _clean=True)

    def scale(self, factor) -> "Polynomial":
        return Polynomial(self.vars, td_scale(self.terms, Fraction(factor)), _clean=True)

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def mul_term(self, m: tuple, coeff) -> "Polynomial":
        coeff = Fraction(coeff)
        if not coeff:
            return Polynomial.zero(self.vars)
        return Polynomial(
            self.vars,
            {tuple(a + b for a, b in zip(mm, m)): c * coeff for mm, c in self.terms.items()},
            _clean=True,
        )

    def diff(self, i: int) -> "Polynomial":
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                dm = m[:i] + (e - 1,) + m[i + 1 :]
                out[dm] = out.get(dm, Fraction(0)) + c * e
        return Polynomial(self.vars, out)

    def eval_exact(self, values: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v, e in zip(values, m):
                if e:
                    t *= v**e
            total += t
        return total

    def eval_mpf(self, values, mp):
        total = mp.mpf(0)
        for m, c in self.terms.items():
            t = mp.mpf(c.numerator) / c.denominator
            for v, e in zip(values, m):
                if e:
                    t *= v**e
            total += t
        return total

    def content(self) -> Fraction:
        """Positive rational content; 0 for the zero polynomial."""
        g = Fraction(0)
        for c in self.terms.values():
            g = _frac_gcd(g, c)
        return g

    def primitive(self) -> tuple:
        """(content-with-sign, primitive integer polynomial with positive leading coeff)."""
        if self.is_zero():
            return Fraction(0), self
        g = self.content()
        _, lc = self.leading()
        if lc < 0:
            g = -g
        return g, self.scale(1 / g)

    def coeffs_in(self, i: int) -> dict:
        """Coefficients as polynomials in the remaining variables, keyed by the x_i power."""
        out: dict = {}
        for m, c in self.terms.items():
            e = m[i]
            rest = m[:i] + (0,) + m[i + 1 :]
            out.setdefault(e, {})[rest] = c
        return {e: Polynomial(self.vars, t, _clean=True) for e, t in out.items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: _grlex_key(mc[0]), reverse=True)

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for m, coeff in self.sorted_terms():
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v for v, e in zip(self.vars, m) if e
            )
            mag = abs(coeff)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            parts.append(("- " if coeff < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def divexact(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact division a / b; raises ValueError when b does not divide a."""
    if b.is_zero():
        raise DivisionByZero("polynomial division")
    if a.is_zero():
        return a
    if b.is_const():
        return a.scale(1 / b.const_value())
    mb, cb = b.leading()
    q: dict = {}
    r = a
    while not r.is_zero():
        mr, cr = r.leading()
        mq = tuple(er - eb for er, eb in zip(mr, mb))
        if any(e < 0 for e in mq):
            raise ValueError("inexact polynomial division")
        cq = cr / cb
        q[mq] = cq
        r = r - b.mul_term(mq, cq)
    return Polynomial(a.vars, q)


def _prem(a: Polynomial, b: Polynomial, i: int) -> Polynomial:
    """Pseudo-remainder of a by b with respect to variable i."""
    db = b.degree_in(i)
    b_coeffs = b.coeffs_in(i)
    lcb = b_coeffs[db]
    r = a
    while True:
        dr = r.degree_in(i)
        if dr < db or r.is_zero():
            return r
        r_coeffs = r.coeffs_in(i)
        lcr = r_coeffs[dr]
        shift = tuple(
            dr - db if j == i else 0 for j in range(len(a.vars))
        )
        r = r * lcb - b * lcr.mul_term(shift, 1)


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Gcd up to a rational scalar, returned primitive with positive leading coeff.

    Primitive PRS: contents are recursed on, pseudo-remainders are made
    primitive at every step.  Sizes in this package stay small enough that
    the simple scheme is preferable to subresultant bookkeeping.
    """
    if a.is_zero():
        return b.primitive()[1] if not b.is_zero() else b
    if b.is_zero():
        return a.primitive()[1]
    a = a.primitive()[1]
    b = b.primitive()[1]
    if a.is_const() or b.is_const():
        return Polynomial.const(a.vars, 1)
    main = next(
        i
        for i in range(len(a.vars))
        if a.degree_in(i) > 0 or b.degree_in(i) > 0
    )

    def split(p: Polynomial) -> tuple:
        coeffs = list(p.coeffs_in(main).values())
        cont = coeffs[0]
        for cf in coeffs[1:]:
            cont = poly_gcd(cont, cf)
            if cont.is_const():
                break
        return cont, divexact(p, cont)

    if a.degree_in(main) == 0 or b.degree_in(main) == 0:
        # One of them is free of the main variable: gcd divides its coefficients.
        free, other = (a, b) if a.degree_in(main) == 0 else (b, a)
        cont_other, _ = split(other)
        return poly_gcd(free, cont_other)

    cont_a, prim_a = split(a)
    cont_b, prim_b = split(b)
    cont = poly_gcd(cont_a, cont_b)
    u, v = prim_a, prim_b
    if u.degree_in(main) < v.degree_in(main):
        u, v = v, u
    while not v.is_zero():
        r = _prem(u, v, main)
        if r.is_zero():
            u = v
            break
        if r.degree_in(main) == 0:
            return cont.primitive()[1]
        u, v = v, r.primitive()[1]
    g = cont * split(u)[1]
    return g.primitive()[1]


_ONE_CACHE: dict = {}


def _one(vars: tuple) -> Polynomial:
    p = _ONE_CACHE.get(vars)
    if p is None:
        p = Polynomial.const(vars, 1)
        _ONE_CACHE[vars] = p
    return p


class RationalFunction:
    """Reduced fraction of polynomials; the canonical form of rational expressions."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Optional[Polynomial] = None, _reduced: bool = False):
        if den is None:
            den = _one(num.vars)
        if den.is_zero():
            raise DivisionByZero("rational function denominator")
        if num.is_zero():
            self.num = num
            self.den = _one(num.vars)
            return
        if not _reduced and not den.is_const():
            g = poly_gcd(num, den)
            if not g.is_const():
                num = divexact(num, g)
                den = divexact(den, g)
        cd, den = den.primitive()
        self.num = num.scale(1 / cd)
        self.den = den

    @property
    def vars(self) -> tuple:
        return self.num.vars

    @classmethod
    def const(cls, vars: tuple, value) -> "RationalFunction":
        return cls(Polynomial.const(vars, value), _reduced=True)

    @classmethod
    def variable(cls, vars: tuple, name: str) -> "RationalFunction":
        return cls(Polynomial.variable(vars, name), _reduced=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        return self.num.const_value() / self.den.const_value()

    def is_polynomial(self) -> bool:
        return self.den.is_const()

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        g = poly_gcd(self.den, other.den)
        if g.is_const():
            return RationalFunction(
                self.num * other.den + other.num * self.den, self.den * other.den
            )
        d1 = divexact(self.den, g)
        d2 = divexact(other.den, g)
        return RationalFunction(self.num * d2 + other.num * d1, d1 * g * d2)

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return self + (-other)

    def __neg__(self) -> "RationalFunction":
        out = RationalFunction.__new__(RationalFunction)
        out.num = -self.num
        out.den = self.den
        return out

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        if self.is_zero() or other.is_zero():
            return RationalFunction.const(self.vars, 0)
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1 = self.num if g1.is_const() else divexact(self.num, g1)
        d2 = other.den if g1.is_const() else divexact(other.den, g1)
        n2 = other.num if g2.is_const() else divexact(other.num, g2)
        d1 = self.den if g2.is_const() else divexact(self.den, g2)
        return RationalFunction(n1 * n2, d1 * d2, _reduced=True)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        if other.is_zero():
            raise DivisionByZero(str(other))
        return self * other.reciprocal()

    def reciprocal(self) -> "RationalFunction":
        if self.is_zero():
            raise DivisionByZero(str(self))
        return RationalFunction(self.den, self.num, _reduced=True)

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            return self.reciprocal() ** (-n)
        return RationalFunction(self.num**n, self.den**n, _reduced=True)

    def diff(self, i: int) -> "RationalFunction":
        if self.den.is_const():
            return RationalFunction(self.num.diff(i), self.den, _reduced=True)
        db = self.den.diff(i)
        g = poly_gcd(self.den, db)
        d1 = divexact(self.den, g)
        c1 = divexact(db, g)
        return RationalFunction(
            self.num.diff(i) * d1 - self.num * c1, d1 * self.den
        )

    def diff_name(self, name: str) -> "RationalFunction":
        return self.diff(self.vars.index(name))

    def eval_exact(self, values: Sequence[Fraction]) -> Fraction:
        dv = self.den.eval_exact(values)
        if dv == 0:
            raise DivisionByZero(str(self.den))
        return self.num.eval_exact(values) / dv

    def eval_mpf(self, values, mp):
        dv = self.den.eval_mpf(values, mp)
        if dv == 0:
            raise DivisionByZero(str(self.den))
        return self.num.eval_mpf(values, mp) / dv

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalFunction)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __str__(self) -> str:
        if self.den.is_const() and self.den.const_value() == 1:
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"
