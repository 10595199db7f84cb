"""Exact arithmetic in real quadratic fields Q(sqrt(d)).

Every level, weight and root produced from an SBIBD(v, k, lambda) lives in
Q(sqrt(k - lambda)), so a single-radicand number type is all we need.
Values with a zero radical part are plain rationals and mix freely with any
radicand; two genuinely irrational values with different radicands do not.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Union

from .errors import MixedRadicandError

Number = Union[int, Fraction, "QuadExt"]

__all__ = [
    "QuadExt",
    "as_quad",
    "squarefree_part",
    "qx_add",
    "qx_mul",
    "qx_inv",
    "qx_to_float",
    "qx_cmp",
    "parse_quad",
]


def squarefree_part(n: int) -> tuple[int, int]:
    """Split ``n >= 0`` as ``s**2 * d`` with ``d`` squarefree; return ``(s, d)``."""
    if n < 0:
        raise ValueError(f"radicand must be non-negative, got {n}")
    if n == 0:
        return 0, 0
    s, d = 1, n
    f = 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            s *= f
        f += 1
    return s, d


def _sign(x) -> int:
    return (x > 0) - (x < 0)


class QuadExt:
    """``rational + radical * sqrt(radicand)`` with rational coefficients.

    Instances are immutable and hashable. The radicand is always squarefree and
    a value whose radical part vanishes is stored with radicand 1.
    """

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, rational=0, radical=0, radicand: int = 1):
        a = Fraction(rational)
        b = Fraction(radical)
        if int(radicand) != radicand:
            raise ValueError("radicand must be an integer")
        s, d = squarefree_part(int(radicand))
        b *= s
        if d == 1:
            a, b = a + b, Fraction(0)
        if b == 0:
            d = 1
        self._a = a
        self._b = b
        self._d = d

    @classmethod
    def _make(cls, a: Fraction, b: Fraction, d: int) -> QuadExt:
        # d is already squarefree (or 1)
        self = object.__new__(cls)
        if b == 0:
            d = 1
        self._a, self._b, self._d = a, b, d
        return self

    @classmethod
    def sqrt(cls, n) -> QuadExt:
        """Exact square root of a non-negative rational ``n``."""
        n = Fraction(n)
        if n < 0:
            raise ValueError("square root of a negative number")
        # sqrt(p/q) = sqrt(p*q)/q
        return cls(0, Fraction(1, n.denominator), n.numerator * n.denominator)

    @property
    def rational_part(self) -> Fraction:
        return self._a

    @property
    def radical_part(self) -> Fraction:
        return self._b

    @property
    def radicand(self) -> int:
        return self._d

    def is_rational(self) -> bool:
        return self._b == 0

    def conjugate(self) -> QuadExt:
        return QuadExt._make(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        """Field norm ``a**2 - b**2 d``, a rational."""
        return self._a * self._a - self._b * self._b * self._d

    def _common(self, other: QuadExt) -> int:
        if self._b == 0:
            return other._d
        if other._b == 0 or self._d == other._d:
            return self._d
        raise MixedRadicandError(
            f"cannot combine sqrt({self._d}) with sqrt({other._d})"
        )

    def __add__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        d = self._common(other)
        return QuadExt._make(self._a + other._a, self._b + other._b, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt._make(-self._a, -self._b, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        d = self._common(other)
        p, q, r, s = self._a, self._b, other._a, other._b
        return QuadExt._make(p * r + q * s * d, p * s + q * r, d)

    __rmul__ = __mul__

    def inverse(self) -> QuadExt:
        n = self.norm()
        if n == 0:
            # for squarefree d > 1 the norm vanishes only at zero
            raise ZeroDivisionError("inverse of zero")
        return QuadExt._make(self._a / n, -self._b / n, self._d)

    def __truediv__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = QuadExt(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sign(self) -> int:
        """Exact sign, decided with integer squaring only."""
        p, q = self._a, self._b
        sp, sq = _sign(p), _sign(q)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        c = p * p - q * q * self._d
        return sp if c > 0 else sq

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def _cmp(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).sign()

    def __eq__(self, other):
        other = as_quad(other)
        if other is NotImplemented:
            return NotImplemented
        return (self._a, self._b, self._d) == (other._a, other._b, other._d)

    def __hash__(self):
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b, self._d))

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __bool__(self):
        return self._a != 0 or self._b != 0

    def __float__(self) -> float:
        p, q, d = self._a, self._b, self._d
        if q == 0:
            return float(p)
        root = math.sqrt(d)
        if _sign(p) * _sign(q) >= 0:
            return float(p) + float(q) * root
        # opposite signs: avoid cancellation through the conjugate
        return float(self.norm()) / (float(p) - float(q) * root)

    def __str__(self) -> str:
        a, b, d = self._a, self._b, self._d
        if b == 0:
            return str(a)
        mag = abs(b)
        rad = f"sqrt({d})" if mag == 1 else f"{mag}*sqrt({d})"
        if a == 0:
            return rad if b > 0 else f"-{rad}"
        return f"{a} {'+' if b > 0 else '-'} {rad}"

    def __repr__(self) -> str:
        return f"QuadExt({str(self)!r})"

    def __reduce__(self):
        return (QuadExt, (self._a, self._b, self._d))


def as_quad(x) -> QuadExt:
    if isinstance(x, QuadExt):
        return x
    if isinstance(x, (int, Rational)):
        return QuadExt(x)
    return NotImplemented


_RAT = r"[+-]?\d+(?:/\d+)?"
_RADICAL = r"(?:(?P<coef>\d+(?:/\d+)?)\s*\*\s*)?sqrt\(\s*(?P<d>\d+)\s*\)"
_MIXED_RE = re.compile(rf"^\s*(?P<a>{_RAT})(?:\s*(?P<op>[+-])\s*{_RADICAL})?\s*$")
_PURE_RE = re.compile(rf"^\s*(?P<op>[+-])?\s*{_RADICAL}\s*$")


def parse_quad(text: str) -> QuadExt:
    """Parse the canonical rendering ``"p/q + r/s*sqrt(d)"`` and its short forms."""
    m = _MIXED_RE.match(text)
    a = Fraction(0)
    if m:
        a = Fraction(m.group("a"))
        if m.group("d") is None:
            return QuadExt(a)
    else:
        m = _PURE_RE.match(text)
        if not m:
            raise ValueError(f"not a quadratic number: {text!r}")
    coef = Fraction(m.group("coef") or 1)
    if m.group("op") == "-":
        coef = -coef
    return QuadExt(a, coef, int(m.group("d")))


def qx_add(a: Number, b: Number) -> QuadExt:
    return as_quad(a) + b


def qx_mul(a: Number, b: Number) -> QuadExt:
    return as_quad(a) * b


def qx_inv(a: Number) -> QuadExt:
    return as_quad(a).inverse()


def qx_to_float(a: Number) -> float:
    return float(as_quad(a))


def qx_cmp(a: Number, b: Number) -> int:
    """Return -1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    return (as_quad(a) - b).sign()
