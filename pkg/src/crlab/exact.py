"""Exact scalars: Gaussian rationals, optionally carrying a power of pi."""

from __future__ import annotations

from fractions import Fraction
import math
from typing import Union

try:  # gmpy2 rationals are an order of magnitude faster than Fraction
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

_RATIONAL = (int, Fraction, type(_Q(1)))

Number = Union[int, Fraction, "QI"]


def _frac(x):
    if isinstance(x, _RATIONAL):
        return _Q(x)
    if isinstance(x, str):
        return _Q(Fraction(x))
    if isinstance(x, float):
        return _Q(Fraction(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


class QI:
    """Element of Q(i), stored as a pair of exact rationals."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, QI):
            if im:
                raise TypeError("QI(re=QI, im=...) is ambiguous")
            self.re, self.im = re.re, re.im
            return
        if isinstance(re, complex):
            self.re, self.im = _frac(re.real), _frac(re.imag)
            return
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def coerce(cls, x) -> "QI":
        return x if isinstance(x, QI) else cls(x)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @classmethod
    def _raw(cls, re, im) -> "QI":
        out = object.__new__(cls)
        out.re = re
        out.im = im
        return out

    def __eq__(self, other):
        if isinstance(other, QI):
            return self.re == other.re and self.im == other.im
        if isinstance(other, _RATIONAL):
            return self.re == other and self.im == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        if isinstance(other, QI):
            return QI._raw(self.re + other.re, self.im + other.im)
        if isinstance(other, _RATIONAL):
            return QI._raw(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QI._raw(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, QI):
            return QI._raw(self.re - other.re, self.im - other.im)
        if isinstance(other, _RATIONAL):
            return QI._raw(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        return QI.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, QI):
            return QI._raw(self.re * other.re - self.im * other.im,
                           self.re * other.im + self.im * other.re)
        if isinstance(other, _RATIONAL):
            return QI._raw(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self) -> "QI":
        return QI._raw(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "QI":
        d = self.norm2()
        if d == 0:
            raise ZeroDivisionError("inverse of zero in Q(i)")
        return QI._raw(self.re / d, -self.im / d)

    def __truediv__(self, other):
        if isinstance(other, _RATIONAL):
            return QI._raw(self.re / other, self.im / other)
        if not isinstance(other, QI):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QI.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = QI(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"QI({self.re})"
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


I = QI(0, 1)


class Scalar:
    """Exact value ``(a + b i) * pi**k`` with rational a, b and integer k.

    Sums of scalars with different pi exponents are not representable and raise
    ``ValueError``; zero is compatible with every exponent.
    """

    __slots__ = ("c", "pi_exp")

    def __init__(self, c=0, pi_exp: int = 0):
        self.c = QI.coerce(c) if not isinstance(c, complex) else QI(c)
        self.pi_exp = int(pi_exp) if self.c else 0

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        return cls(x)

    @property
    def re(self) -> Fraction:
        return self.c.re

    @property
    def im(self) -> Fraction:
        return self.c.im

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        if isinstance(other, _RATIONAL + (QI, Scalar)):
            o = Scalar.coerce(other)
            return self.c == o.c and self.pi_exp == o.pi_exp
        return NotImplemented

    def __hash__(self):
        return hash((self.c, self.pi_exp))

    def __add__(self, other):
        if not isinstance(other, _RATIONAL + (QI, Scalar)):
            return NotImplemented
        o = Scalar.coerce(other)
        if not o:
            return self
        if not self:
            return o
        if o.pi_exp != self.pi_exp:
            raise ValueError(
                f"cannot add scalars with pi exponents {self.pi_exp} and {o.pi_exp}")
        return Scalar(self.c + o.c, self.pi_exp)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.c, self.pi_exp)

    def __sub__(self, other):
        return self + (-Scalar.coerce(other))

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, _RATIONAL + (QI, Scalar)):
            return NotImplemented
        o = Scalar.coerce(other)
        return Scalar(self.c * o.c, self.pi_exp + o.pi_exp)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        return Scalar(self.c.inverse(), -self.pi_exp)

    def __truediv__(self, other):
        return self * Scalar.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inverse()

    def conjugate(self) -> "Scalar":
        return Scalar(self.c.conjugate(), self.pi_exp)

    def __complex__(self):
        return complex(self.c) * math.pi ** self.pi_exp

    def to_json(self) -> dict:
        return {"re": str(self.re), "im": str(self.im), "pi_exp": self.pi_exp}

    @classmethod
    def from_json(cls, d: dict) -> "Scalar":
        return cls(QI(Fraction(d["re"]), Fraction(d["im"])), int(d.get("pi_exp", 0)))

    def __repr__(self):
        return f"Scalar({self.c!s}, pi^{self.pi_exp})"


def inv_two_pi_i() -> Scalar:
    """(-2 pi i)^{-1} = i / (2 pi)."""
    return Scalar(QI(0, Fraction(1, 2)), -1)
