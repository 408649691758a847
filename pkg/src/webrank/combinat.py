"""Integer combinatorics of web rank bounds.

Dimension counts, ordinarity thresholds, the rank bounds pi_zero / pi_prime
/ pi_henaut, matrix-size bookkeeping and the calibration predicates.  All
clamped sums run over exact rationals; every exposed count is an integer and
asserted to be one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

__all__ = [
    "BoundProfile",
    "binom",
    "c",
    "z",
    "plain_ratio",
    "closed_ratio",
    "k_zero",
    "k_one",
    "pi_henaut",
    "pi_zero",
    "pi_prime",
    "pi_zero_dim3_closed_form",
    "sizes",
    "is_calibrated",
    "is_strongly_calibrated",
    "prop2_check",
    "bound_profile",
]


def binom(r: int, s: int) -> int:
    """Binomial coefficient, 0 outside 0 <= s <= r."""
    if s < 0 or s > r:
        return 0
    return comb(r, s)


def c(r: int, h: int) -> int:
    """Dimension of the space of degree-h homogeneous polynomials in r variables."""
    if r < 1 or h < 0:
        raise ValueError(f"c(r,h) needs r >= 1, h >= 0, got ({r},{h})")
    return comb(r - 1 + h, h)


def z(n: int, p: int, k: int) -> int:
    """Number of independent closed top-layer symbols: binom(n+k, n-p)*c(p,k).

    Equals the alternating sum over the tail of the Koszul resolution; both
    forms are computed and compared when assertions are enabled.
    """
    if not (1 <= p <= n) or k < 0:
        raise ValueError(f"z(n,p,k) needs 1 <= p <= n, k >= 0, got ({n},{p},{k})")
    value = binom(n + k, n - p) * c(p, k)
    assert value == _z_alternating(n, p, k)
    return value


def _z_alternating(n: int, p: int, k: int) -> int:
    return sum((-1) ** (p - j + 1) * binom(n, j) * c(n, k + p - j) for j in range(p))


def _check_params(n: int, d: int, q: int, p: int) -> None:
    if n < 2 or not (1 <= q <= n - 1) or not (1 <= p <= q) or d < 1:
        raise ValueError(f"invalid (n,d,q,p) = ({n},{d},{q},{p})")


def plain_ratio(n: int, q: int, p: int, k: int) -> Fraction:
    """b(n,p)c(n,k) / (b(q,p)c(q,k)); strictly increasing in k."""
    return Fraction(binom(n, p) * c(n, k), binom(q, p) * c(q, k))


def closed_ratio(n: int, q: int, p: int, k: int) -> Fraction:
    """z(n,p,k) / z(q,p,k); strictly increasing in k."""
    return Fraction(z(n, p, k), z(q, p, k))


def _largest_k(d: int, ratio) -> Optional[int]:
    if ratio(0) > d:
        return None
    k = 0
    while ratio(k + 1) <= d:
        k += 1
    return k


def k_zero(n: int, d: int, q: int, p: int) -> Optional[int]:
    """Largest k with plain_ratio <= d, or None when even k=0 fails."""
    _check_params(n, d, q, p)
    return _largest_k(d, lambda k: plain_ratio(n, q, p, k))


def k_one(n: int, d: int, q: int, p: int) -> Optional[int]:
    """Largest k with closed_ratio <= d, or None when even k=0 fails."""
    _check_params(n, d, q, p)
    return _largest_k(d, lambda k: closed_ratio(n, q, p, k))


def _clamped_sum(weight, clamp, multiplier: int = 1) -> int:
    """multiplier * sum of weight(h) * max(clamp(h), 0), stopped at the first
    zero clamp (sound: every clamp used here strictly decreases in h).

    The multiplied total is asserted to be an integer; bare partial sums need
    not be.
    """
    total = Fraction(0)
    h = 0
    while True:
        t = clamp(h)
        if t <= 0:
            break
        total += weight(h) * t
        h += 1
    total *= multiplier
    assert total.denominator == 1, f"non-integer bound {total}"
    return int(total)


def pi_henaut(n: int, d: int, q: int, p: int) -> int:
    """Castelnuovo-type bound for q | n."""
    _check_params(n, d, q, p)
    if n % q != 0:
        raise ValueError(f"pi_henaut requires q | n, got q={q}, n={n}")
    m = n // q - 1
    return _clamped_sum(
        lambda h: c(q, h), lambda h: Fraction(d - m * (p + h) - 1), binom(q, p)
    )


def pi_zero(n: int, d: int, q: int, p: int) -> int:
    """Rank bound for p-ordinary webs."""
    _check_params(n, d, q, p)
    return _clamped_sum(
        lambda h: c(q, h), lambda h: d - plain_ratio(n, q, p, h), binom(q, p)
    )


def pi_prime(n: int, d: int, q: int, p: int) -> int:
    """Closed-rank bound for strongly p-ordinary webs."""
    _check_params(n, d, q, p)
    return _clamped_sum(lambda h: z(q, p, h), lambda h: d - closed_ratio(n, q, p, h))


def pi_zero_dim3_closed_form(d: int) -> int:
    """Closed form delta(delta+1)(delta-rho)/4 with 4d-2 = 3*delta+rho.

    Comparison routine only: it agrees with pi_zero(3,d,2,1) at d=3 (both 6)
    but not at d=2 (1 vs 3) nor d=4 (20 vs 10); pi_zero never uses it.
    """
    delta, rho = divmod(4 * d - 2, 3)
    value = Fraction(delta * (delta + 1) * (delta - rho), 4)
    assert value.denominator == 1
    return int(value)


def sizes(n: int, d: int, q: int, p: int, k: int) -> dict:
    """Cumulative system sizes alpha/beta and their closed (tilde) analogues."""
    _check_params(n, d, q, p)
    if k < 0:
        raise ValueError("k must be >= 0")
    return {
        "alpha": d * sum(binom(q, p) * c(q, h) for h in range(k + 1)),
        "beta": sum(binom(n, p) * c(n, h) for h in range(k + 1)),
        "alpha_tilde": d * sum(z(q, p, h) for h in range(k + 1)),
        "beta_tilde": sum(z(n, p, h) for h in range(k + 1)),
    }


def is_calibrated(n: int, d: int, q: int, p: int) -> bool:
    """d equals the plain ratio exactly at k_zero."""
    k0 = k_zero(n, d, q, p)
    return k0 is not None and plain_ratio(n, q, p, k0) == d


def is_strongly_calibrated(n: int, d: int, q: int, p: int) -> bool:
    """d equals the closed ratio exactly at k_one."""
    k1 = k_one(n, d, q, p)
    return k1 is not None and closed_ratio(n, q, p, k1) == d


def prop2_check(n: int, d: int, q: int, p: int) -> bool:
    """Necessary condition for p-ordinarity: tilde defect <= plain defect.

    For p=q the plain and closed relation spaces coincide and the plain
    equation count overcounts dependent rows, so the condition is vacuous;
    True is returned.  Likewise when either threshold is absent (empty
    k-range).
    """
    _check_params(n, d, q, p)
    if p == q:
        return True
    k0, k1 = k_zero(n, d, q, p), k_one(n, d, q, p)
    if k0 is None or k1 is None:
        return True
    for k in range(min(k0, k1) + 1):
        s = sizes(n, d, q, p, k)
        if s["alpha_tilde"] - s["beta_tilde"] > s["alpha"] - s["beta"]:
            return False
    return True


@dataclass(frozen=True)
class BoundProfile:
    """All counting invariants of a (n,d,q,p) configuration."""

    n: int
    q: int
    d: int
    p: int
    k0: Optional[int]
    k1: Optional[int]
    pi0: int
    pi_prime: int
    pi_henaut: Optional[int]
    calibrated: bool
    strongly_calibrated: bool
    prop2_ok: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "q": self.q,
            "d": self.d,
            "p": self.p,
            "k0": self.k0,
            "k1": self.k1,
            "pi0": self.pi0,
            "pi_prime": self.pi_prime,
            "pi_henaut": self.pi_henaut,
            "calibrated": self.calibrated,
            "strongly_calibrated": self.strongly_calibrated,
            "prop2_ok": self.prop2_ok,
        }


def bound_profile(n: int, d: int, q: int, p: int) -> BoundProfile:
    _check_params(n, d, q, p)
    return BoundProfile(
        n=n,
        q=q,
        d=d,
        p=p,
        k0=k_zero(n, d, q, p),
        k1=k_one(n, d, q, p),
        pi0=pi_zero(n, d, q, p),
        pi_prime=pi_prime(n, d, q, p),
        pi_henaut=pi_henaut(n, d, q, p) if n % q == 0 else None,
        calibrated=is_calibrated(n, d, q, p),
        strongly_calibrated=is_strongly_calibrated(n, d, q, p),
        prop2_ok=prop2_check(n, d, q, p),
    )
