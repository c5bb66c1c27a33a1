"""Exact arithmetic on the real quadratic field Q(sqrt(D)).

Every quantity in this package -- positions, gaps, thresholds, shift
budgets -- is a :class:`QuadReal`, a number of the form ``r + s*sqrt(D)``
with rational ``r``, ``s`` and a fixed positive square-free integer ``D``.
Comparisons are decided by integer arithmetic alone; no floating point is
ever consulted for a decision.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Union

DEFAULT_D = 2

RationalLike = Union[int, Fraction]


class ConfigError(ValueError):
    """Raised when two values from incompatible fields are combined."""


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    if n % 4 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 2
    return True


@total_ordering
class QuadReal:
    """An exact element ``(a + b*sqrt(d)) / c`` with integers a, b, c > 0.

    The triple is kept normalized: gcd(a, b, c) == 1 and c > 0, so equal
    values have equal representations and hash consistently.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, r: RationalLike = 0, s: RationalLike = 0, d: int | None = None):
        if isinstance(r, QuadReal):
            raise TypeError("pass rationals; QuadReal copies are unnecessary (immutable)")
        d = DEFAULT_D if d is None else d
        rf = Fraction(r)
        sf = Fraction(s)
        c = rf.denominator * sf.denominator // math.gcd(rf.denominator, sf.denominator)
        a = rf.numerator * (c // rf.denominator)
        b = sf.numerator * (c // sf.denominator)
        g = math.gcd(a, b, c)
        self.a = a // g
        self.b = b // g
        self.c = c // g
        self.d = d

    @classmethod
    def _raw(cls, a: int, b: int, c: int, d: int) -> "QuadReal":
        self = object.__new__(cls)
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(a, b, c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        self.a = a
        self.b = b
        self.c = c
        self.d = d
        return self

    # -- field accessors ----------------------------------------------------

    @property
    def r(self) -> Fraction:
        """Rational part (coefficient of 1), in lowest terms."""
        return Fraction(self.a, self.c)

    @property
    def s(self) -> Fraction:
        """Coefficient of sqrt(d), in lowest terms."""
        return Fraction(self.b, self.c)

    def is_rational(self) -> bool:
        return self.b == 0

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_integer(self) -> bool:
        return self.b == 0 and self.c == 1

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "QuadReal":
        if isinstance(other, QuadReal):
            if other.d != self.d and other.b != 0 and self.b != 0:
                raise ConfigError(f"mixed radicands: sqrt({self.d}) vs sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return QuadReal._raw(f.numerator, 0, f.denominator, self.d)
        return NotImplemented  # type: ignore[return-value]

    def _same_d(self, other: "QuadReal") -> int:
        return self.d if self.b != 0 or other.b == 0 else other.d

    def __add__(self, other) -> "QuadReal":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        d = self._same_d(o)
        return QuadReal._raw(self.a * o.c + o.a * self.c,
                             self.b * o.c + o.b * self.c,
                             self.c * o.c, d)

    __radd__ = __add__

    def __neg__(self) -> "QuadReal":
        return QuadReal._raw(-self.a, -self.b, self.c, self.d)

    def __sub__(self, other) -> "QuadReal":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        d = self._same_d(o)
        return QuadReal._raw(self.a * o.c - o.a * self.c,
                             self.b * o.c - o.b * self.c,
                             self.c * o.c, d)

    def __rsub__(self, other) -> "QuadReal":
        return (-self).__add__(other)

    def __mul__(self, other) -> "QuadReal":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        d = self._same_d(o)
        a = self.a * o.a + self.b * o.b * d
        b = self.a * o.b + self.b * o.a
        return QuadReal._raw(a, b, self.c * o.c, d)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "QuadReal":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero QuadReal")
        d = self._same_d(o)
        # 1/(a + b*sqrt(d)) = (a - b*sqrt(d)) / (a^2 - b^2 d)
        norm = o.a * o.a - o.b * o.b * d
        a = (self.a * o.a - self.b * o.b * d) * o.c
        b = (self.b * o.a - self.a * o.b) * o.c
        return QuadReal._raw(a, b, self.c * norm, d)

    def __rtruediv__(self, other) -> "QuadReal":
        o = self._coerce(other)
        return o / self

    def __abs__(self) -> "QuadReal":
        return -self if self.sign() < 0 else self

    # -- order ---------------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of the value, by case analysis and integer squaring."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs = a * a
        rhs = b * b * self.d
        if a > 0:  # b < 0
            return (lhs > rhs) - (lhs < rhs)
        return (rhs > lhs) - (rhs < lhs)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QuadReal(other, 0, self.d)
        if not isinstance(other, QuadReal):
            return NotImplemented
        if self.b != 0 and other.b != 0 and self.d != other.d:
            return False
        return self.a == other.a and self.b == other.b and self.c == other.c

    def _cmp(self, o: "QuadReal") -> int:
        """Exact sign of self - other, allocation-free."""
        a = self.a * o.c - o.a * self.c
        b = self.b * o.c - o.b * self.c
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        lhs = a * a
        rhs = b * b * (self.d if self.b else o.d)
        if a > 0:
            return (lhs > rhs) - (lhs < rhs)
        return (rhs > lhs) - (rhs < lhs)

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.b != 0 and o.b != 0 and self.d != o.d:
            raise ConfigError(f"mixed radicands: sqrt({self.d}) vs sqrt({o.d})")
        return self._cmp(o) < 0

    def __hash__(self):
        if self.b == 0:
            return hash(Fraction(self.a, self.c))
        return hash((self.a, self.b, self.c, self.d))

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- rounding ------------------------------------------------------------

    def floor(self) -> int:
        """Exact floor, via integer square roots."""
        if self.b == 0:
            return self.a // self.c
        t = math.isqrt(self.b * self.b * self.d)
        w = t if self.b > 0 else -t - 1  # b*sqrt(d) irrational for b != 0
        return (self.a + w) // self.c

    def ceil(self) -> int:
        return -(-self).floor()

    def __float__(self) -> float:
        return self.a / self.c + (self.b / self.c) * math.sqrt(self.d)

    def approx(self, digits: int = 12) -> str:
        """Decimal approximation for display only, marked approximate."""
        return f"~{float(self):.{digits}g}"

    # -- text form -----------------------------------------------------------

    def __str__(self) -> str:
        return format_quadreal(self)

    def __repr__(self) -> str:
        return f"QuadReal({self.r!r}, {self.s!r}, d={self.d})"


def quad(r: RationalLike = 0, s: RationalLike = 0, d: int | None = None) -> QuadReal:
    """Shorthand constructor: quad(r, s) == r + s*sqrt(D)."""
    return QuadReal(r, s, d)


def sqrtD(d: int | None = None) -> QuadReal:
    return QuadReal(0, 1, d)


def compare(a: QuadReal, b: QuadReal) -> int:
    """Exact sign of a - b: -1, 0 or +1."""
    return (a - b).sign()


def qmin(*vals: QuadReal) -> QuadReal:
    out = vals[0]
    for v in vals[1:]:
        if v < out:
            out = v
    return out


def qmax(*vals: QuadReal) -> QuadReal:
    out = vals[0]
    for v in vals[1:]:
        if v > out:
            out = v
    return out


def _fraction_gcd(x: Fraction, y: Fraction) -> Fraction:
    return Fraction(math.gcd(x.numerator * y.denominator, y.numerator * x.denominator),
                    x.denominator * y.denominator)


def rational_ratio(a: QuadReal, b: QuadReal) -> Fraction | None:
    """a/b as a Fraction when the ratio is rational, else None.

    The cross test r_a*s_b == r_b*s_a characterizes rational ratios for
    nonzero b.
    """
    if b.is_zero():
        return None
    if a.is_zero():
        return Fraction(0)
    if a.r * b.s != b.r * a.s:
        return None
    if b.s != 0:
        return a.s / b.s
    return a.r / b.r


def real_gcd(a: QuadReal, b: QuadReal) -> QuadReal:
    """Greatest c >= 0 such that a and b are both integer multiples of c.

    Zero when a/b is irrational; gcd(x, 0) == |x|.
    """
    if a.is_zero() and b.is_zero():
        return QuadReal(0, 0, a.d)
    if a.is_zero():
        return abs(b)
    if b.is_zero():
        return abs(a)
    q = rational_ratio(a, b)
    if q is None:
        return QuadReal(0, 0, a.d)
    # a = q*b, b = 1*b  =>  gcd = gcd(q, 1) * |b|
    return abs(b) * _fraction_gcd(abs(q), Fraction(1))


def gcd_ladder(a: QuadReal, b: QuadReal, delta: QuadReal | None = None,
               max_steps: int = 10_000):
    """Alternating remainder ladder from a < 0 < b.

    Each row adds the largest multiple of one value to the other without
    crossing zero.  Rationally dependent inputs reach an exact zero with the
    surviving value equal to +-real_gcd(|a|, |b|); independent inputs shrink
    geometrically and stop once both fall below ``delta`` in absolute value.

    Returns ``(rows, coeffs)`` where rows is a list of
    ``(a_k, b_k, l_k, l'_k)`` and coeffs = (p, q, p', q') are naturals with
    ``a_K == p*a + q*b`` and ``b_K == p'*a + q'*b``.
    """
    if not (a.sign() < 0 < b.sign()):
        raise ValueError("ladder requires a < 0 < b")
    ak, bk = a, b
    # coefficient rows: ak = pa*a + qa*b ; bk = pb*a + qb*b
    pa, qa, pb, qb = 1, 0, 0, 1
    rows = []
    for _ in range(max_steps):
        l = ((-ak) / bk).floor()
        ak = ak + bk * l
        pa, qa = pa + l * pb, qa + l * qb
        if ak.is_zero():
            lp = 0
        else:
            lp = (bk / (-ak)).floor()
            bk = bk + ak * lp
            pb, qb = pb + lp * pa, qb + lp * qa
        rows.append((ak, bk, l, lp))
        if ak.is_zero() or bk.is_zero():
            break
        if delta is not None and abs(ak) < delta and bk < delta:
            break
    else:
        raise ValueError("ladder did not terminate; pass delta for independent inputs")
    return rows, (pa, qa, pb, qb)


# -- canonical text form ------------------------------------------------------

_SQRT_RE = re.compile(r"^(?:(?P<coef>-?\d+(?:/\d+)?)\*)?sqrt\((?P<d>\d+)\)$")
_RAT_RE = re.compile(r"^-?\d+(?:/\d+)?$")


def format_quadreal(x: QuadReal) -> str:
    """Canonical text form: "r", "s*sqrt(D)" or "r + s*sqrt(D)".

    Zero terms are omitted; a unit coefficient on the radical prints bare.
    """
    if x.is_zero():
        return "0"
    parts = []
    if x.r != 0:
        parts.append(str(x.r))
    if x.s != 0:
        mag = abs(x.s)
        body = f"sqrt({x.d})" if mag == 1 else f"{mag}*sqrt({x.d})"
        if not parts:
            parts.append(body if x.s > 0 else "-" + body)
        else:
            parts.append("+" if x.s > 0 else "-")
            parts.append(body)
    return " ".join(parts)


def parse_quadreal(text: str, d: int | None = None) -> QuadReal:
    """Parse the canonical text form (inverse of :func:`format_quadreal`)."""
    s = text.strip()
    if not s:
        raise ValueError("empty QuadReal literal")
    # split on top-level +/- separators surrounded by spaces, keep leading sign
    tokens = s.replace(" - ", " + -").split(" + ")
    r_acc = Fraction(0)
    s_acc = Fraction(0)
    d_seen: int | None = None
    for tok in tokens:
        tok = tok.strip()
        neg = tok.startswith("-") and tok[1:].lstrip().startswith("sqrt")
        m = _SQRT_RE.match(tok[1:].lstrip() if neg else tok)
        if m:
            coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
            if neg:
                coef = -coef
            td = int(m.group("d"))
            if d_seen is not None and td != d_seen:
                raise ValueError(f"mixed radicands in {text!r}")
            d_seen = td
            s_acc += coef
        elif _RAT_RE.match(tok):
            r_acc += Fraction(tok)
        else:
            raise ValueError(f"cannot parse QuadReal term {tok!r}")
    if d_seen is not None and d is not None and d_seen != d:
        raise ValueError(f"radicand mismatch: literal has {d_seen}, expected {d}")
    return QuadReal(r_acc, s_acc, d_seen if d_seen is not None else d)
