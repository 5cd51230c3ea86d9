"""Exact arithmetic in Q(q), q = exp(i*pi/3).

Elements are stored as ``a + b*q`` with rational ``a``, ``b``; products are
reduced with ``q**2 = q - 1``.  The field contains every constant the density
formulas need at the stochastic point: ``1/q = 1 - q``, ``q**2 = q - 1`` and
``i*sqrt(3) = 2*q - 1``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

import mpmath

__all__ = [
    "CycNum",
    "NonRealError",
    "Q",
    "ONE",
    "ZERO",
    "I_SQRT3",
    "cyc_mul",
    "cyc_inv",
    "cyc_to_complex",
    "cyc_as_rational",
]


class NonRealError(ArithmeticError):
    """A value expected to be rational has a nonzero ``q`` component."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class CycNum:
    """Immutable element ``a + b*q`` of the sixth cyclotomic field."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        object.__setattr__(self, "a", _frac(a))
        object.__setattr__(self, "b", _frac(b))

    def __setattr__(self, name, value):
        raise AttributeError("CycNum is immutable")

    @classmethod
    def _make(cls, a: Fraction, b: Fraction) -> CycNum:
        # trusted constructor, skips conversion
        obj = object.__new__(cls)
        object.__setattr__(obj, "a", a)
        object.__setattr__(obj, "b", b)
        return obj

    @staticmethod
    def coerce(x) -> CycNum:
        if isinstance(x, CycNum):
            return x
        return CycNum._make(_frac(x), Fraction(0))

    # -- ring operations -------------------------------------------------

    def __add__(self, other):
        if isinstance(other, CycNum):
            return CycNum._make(self.a + other.a, self.b + other.b)
        try:
            return CycNum._make(self.a + _frac(other), self.b)
        except TypeError:
            return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return CycNum._make(-self.a, -self.b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, CycNum):
            return CycNum._make(self.a - other.a, self.b - other.b)
        try:
            return CycNum._make(self.a - _frac(other), self.b)
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        try:
            return CycNum._make(_frac(other) - self.a, -self.b)
        except TypeError:
            return NotImplemented

    def __mul__(self, other):
        if isinstance(other, CycNum):
            a, b, c, d = self.a, self.b, other.a, other.b
            bd = b * d
            return CycNum._make(a * c - bd, a * d + b * c + bd)
        try:
            r = _frac(other)
        except TypeError:
            return NotImplemented
        return CycNum._make(self.a * r, self.b * r)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm ``a**2 + a*b + b**2`` (also ``|x|**2``)."""
        a, b = self.a, self.b
        return a * a + a * b + b * b

    def conjugate(self) -> CycNum:
        return CycNum._make(self.a + self.b, -self.b)

    def inverse(self) -> CycNum:
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("inverse of zero in Q(q)")
        return CycNum._make((self.a + self.b) / nrm, -self.b / nrm)

    def __truediv__(self, other):
        if isinstance(other, CycNum):
            return self * other.inverse()
        try:
            r = _frac(other)
        except TypeError:
            return NotImplemented
        if r == 0:
            raise ZeroDivisionError("division by zero in Q(q)")
        return CycNum._make(self.a / r, self.b / r)

    def __rtruediv__(self, other):
        try:
            return CycNum.coerce(other) * self.inverse()
        except TypeError:
            return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self
        if k < 0:
            base, k = self.inverse(), -k
        result = ONE
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- comparisons and conversion --------------------------------------

    def __eq__(self, other):
        if isinstance(other, CycNum):
            return self.a == other.a and self.b == other.b
        try:
            return self.b == 0 and self.a == _frac(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def __repr__(self):
        return f"CycNum({self})"

    def __str__(self):
        return f"{_fmt(self.a)}+{_fmt(self.b)}*q"

    @classmethod
    def parse(cls, text: str) -> CycNum:
        """Inverse of ``str``: accepts ``"a+b*q"`` with ``a``, ``b`` as ``num/den``."""
        m = _PATTERN.fullmatch(text.strip())
        if m is None:
            raise ValueError(f"not a CycNum literal: {text!r}")
        return cls(Fraction(m.group(1)), Fraction(m.group(2)))

    def to_complex(self, digits: int = 30) -> mpmath.mpc:
        return cyc_to_complex(self, digits)


_RAT = r"[+-]?\d+(?:/\d+)?"
_PATTERN = re.compile(rf"({_RAT})\+({_RAT})\*q")


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


ZERO = CycNum._make(Fraction(0), Fraction(0))
ONE = CycNum._make(Fraction(1), Fraction(0))
Q = CycNum._make(Fraction(0), Fraction(1))
I_SQRT3 = CycNum._make(Fraction(-1), Fraction(2))


def cyc_mul(x: CycNum, y: CycNum) -> CycNum:
    return x * y


def cyc_inv(x: CycNum) -> CycNum:
    return x.inverse()


def cyc_to_complex(x, digits: int) -> mpmath.mpc:
    """Embed ``x`` into C with at least ``digits`` correct decimal digits.

    ``x`` may be a CycNum or a plain rational.  The value is computed with a
    few guard digits; the mantissa keeps that precision even if the caller's
    mpmath context is coarser.
    """
    if digits < 1:
        raise ValueError("digits must be positive")
    x = CycNum.coerce(x)
    with mpmath.workdps(digits + 10):
        a = mpmath.mpf(x.a.numerator) / x.a.denominator
        b = mpmath.mpf(x.b.numerator) / x.b.denominator
        return mpmath.mpc(a + b / 2, b * mpmath.sqrt(3) / 2)


def cyc_as_rational(x) -> Fraction:
    """Return ``x`` as a Fraction, or raise NonRealError if its q-part is nonzero."""
    x = CycNum.coerce(x)
    if x.b != 0:
        raise NonRealError(f"expected a rational value, got {x}")
    return x.a
