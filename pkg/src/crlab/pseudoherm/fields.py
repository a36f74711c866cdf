"""Exact polynomial fields on the CR three-sphere and the log-term density.

Fields are finite sums ``sum c_m z^a zbar^b`` over reduced monomials (see
:mod:`crlab.pseudoherm.conventions`) with Gaussian-rational coefficients and
an overall power of pi. The frame acts by exact derivations, so every
operation in this module is free of discretization error.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
import math
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np

from ..exact import QI, Scalar
from .conventions import DIRECTIONS, PSI_PREFACTOR, SUBLAPLACIAN_SIGN, VOLUME

Mono = Tuple[int, int, int, int]

#: largest truncation degree accepted by the frame operators
MAX_DEGREE = 48


class DegreeCapError(ValueError):
    """Truncation degree above :data:`MAX_DEGREE`."""


class TruncationMismatch(ValueError):
    """Fields of one data set disagree on their truncation."""


@lru_cache(maxsize=None)
def _reduce(m: Mono) -> Tuple[Tuple[Mono, int], ...]:
    """Rewrite ``z2^k z2bar^k`` as ``(1 - z1 z1bar)^k``; returns (monomial, integer weight) pairs."""
    a1, a2, b1, b2 = m
    k = min(a2, b2)
    if k == 0:
        return ((m, 1),)
    return tuple(((a1 + j, a2 - k, b1 + j, b2 - k), (-1) ** j * math.comb(k, j)) for j in range(k + 1))


@lru_cache(maxsize=None)
def _derive(m: Mono, direction: str) -> Tuple[Tuple[Mono, QI], ...]:
    a1, a2, b1, b2 = m
    raw = []
    if direction == "T":
        w = a1 + a2 - b1 - b2
        if w:
            raw.append((m, QI(0, w)))
    elif direction == "Z1":
        if a1:
            raw.append(((a1 - 1, a2, b1, b2 + 1), QI(a1)))
        if a2:
            raw.append(((a1, a2 - 1, b1 + 1, b2), QI(-a2)))
    elif direction == "Z1bar":
        if b1:
            raw.append(((a1, a2 + 1, b1 - 1, b2), QI(b1)))
        if b2:
            raw.append(((a1 + 1, a2, b1, b2 - 1), QI(-b2)))
    else:
        raise ValueError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    out: Dict[Mono, QI] = {}
    for mono, c in raw:
        for r, w in _reduce(mono):
            out[r] = out.get(r, QI(0)) + c * w
    return tuple((k, v) for k, v in out.items() if v)


def _mono_degree(m: Mono) -> int:
    return sum(m)


class HarmonicField:
    """``pi^pi_exp * sum_m c_m m`` on the three-sphere, truncated at ``degree``.

    Parameters
    ----------
    coeffs : mapping
        ``{(a1, a2, b1, b2): coefficient}``. Monomials with both ``a2`` and
        ``b2`` positive are reduced on construction. Coefficients may be
        ints, Fractions, decimal strings, floats (converted exactly) or
        :class:`QI`.
    degree : int, optional
        Truncation degree; defaults to the largest monomial degree.
    pi_exp : int
        Power of pi multiplying the whole field.
    """

    __slots__ = ("coeffs", "degree", "pi_exp")

    def __init__(self, coeffs: Optional[Mapping] = None, degree: Optional[int] = None, pi_exp: int = 0):
        acc: Dict[Mono, QI] = {}
        for mono, c in (coeffs or {}).items():
            mono = tuple(int(x) for x in mono)
            if len(mono) != 4 or min(mono) < 0:
                raise ValueError(f"monomial exponents must be four nonnegative ints, got {mono}")
            c = QI.coerce(Fraction(c) if isinstance(c, str) else c)
            for r, w in _reduce(mono):
                acc[r] = acc.get(r, QI(0)) + c * w
        self.coeffs = {m: c for m, c in acc.items() if c}
        top = max((_mono_degree(m) for m in self.coeffs), default=0)
        if degree is None:
            degree = top
        if degree < top:
            raise ValueError(f"support reaches degree {top} above truncation {degree}")
        self.degree = int(degree)
        self.pi_exp = int(pi_exp) if self.coeffs else 0

    # construction helpers
    @classmethod
    def constant(cls, c=1) -> "HarmonicField":
        return cls({(0, 0, 0, 0): c})

    @classmethod
    def monomial(cls, a1: int, a2: int, b1: int, b2: int, c=1) -> "HarmonicField":
        return cls({(a1, a2, b1, b2): c})

    def with_degree(self, degree: int) -> "HarmonicField":
        return HarmonicField(self.coeffs, degree, self.pi_exp)

    # algebra
    def _check_pi(self, other: "HarmonicField") -> int:
        if not self.coeffs:
            return other.pi_exp
        if not other.coeffs:
            return self.pi_exp
        if self.pi_exp != other.pi_exp:
            raise ValueError(f"cannot add fields with pi exponents {self.pi_exp} and {other.pi_exp}")
        return self.pi_exp

    def __add__(self, other: "HarmonicField") -> "HarmonicField":
        if not isinstance(other, HarmonicField):
            return NotImplemented
        pe = self._check_pi(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, QI(0)) + c
        return HarmonicField(out, max(self.degree, other.degree), pe)

    def __neg__(self) -> "HarmonicField":
        return HarmonicField({m: -c for m, c in self.coeffs.items()}, self.degree, self.pi_exp)

    def __sub__(self, other: "HarmonicField") -> "HarmonicField":
        if not isinstance(other, HarmonicField):
            return NotImplemented
        return self + (-other)

    def scale(self, s) -> "HarmonicField":
        """Multiply by an exact scalar (int, Fraction, QI or :class:`Scalar`)."""
        s = Scalar.coerce(s)
        return HarmonicField({m: c * s.c for m, c in self.coeffs.items()}, self.degree, self.pi_exp + s.pi_exp)

    def __mul__(self, other):
        if isinstance(other, HarmonicField):
            out: Dict[Mono, QI] = {}
            for m1, c1 in self.coeffs.items():
                for m2, c2 in other.coeffs.items():
                    m = tuple(x + y for x, y in zip(m1, m2))
                    for r, w in _reduce(m):
                        out[r] = out.get(r, QI(0)) + c1 * c2 * w
            return HarmonicField(out, self.degree + other.degree, self.pi_exp + other.pi_exp)
        try:
            return self.scale(other)
        except (TypeError, ValueError):
            return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, HarmonicField):
            return NotImplemented
        if not self.coeffs and not other.coeffs:
            return True
        return self.pi_exp == other.pi_exp and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((frozenset(self.coeffs.items()), self.pi_exp))

    def __bool__(self):
        return bool(self.coeffs)

    def conjugate(self) -> "HarmonicField":
        return HarmonicField({(m[2], m[3], m[0], m[1]): c.conjugate() for m, c in self.coeffs.items()},
                             self.degree, self.pi_exp)

    @property
    def real(self) -> "HarmonicField":
        return (self + self.conjugate()).scale(Fraction(1, 2))

    @property
    def imag(self) -> "HarmonicField":
        return (self - self.conjugate()).scale(QI(0, Fraction(-1, 2)))

    @property
    def is_real(self) -> bool:
        """True when the coefficients are conjugate-symmetric."""
        return self == self.conjugate()

    def __call__(self, z1, z2) -> np.ndarray:
        """Evaluate at points of the sphere (no check that ``|z| = 1``)."""
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        out = np.zeros(np.broadcast(z1, z2).shape, dtype=complex)
        for (a1, a2, b1, b2), c in self.coeffs.items():
            out = out + complex(c) * z1**a1 * z2**a2 * np.conj(z1) ** b1 * np.conj(z2) ** b2
        return out * math.pi**self.pi_exp

    # serialization
    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "pi_exp": self.pi_exp,
            "coeffs": [[*m, str(c.re), str(c.im)] for m, c in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "HarmonicField":
        coeffs: Dict[Mono, QI] = {}
        for row in d.get("coeffs", []):
            if len(row) not in (5, 6):
                raise ValueError(f"coefficient rows are [a1, a2, b1, b2, re(, im)], got {row!r}")
            m = tuple(int(x) for x in row[:4])
            re = Fraction(str(row[4]))
            im = Fraction(str(row[5])) if len(row) == 6 else Fraction(0)
            coeffs[m] = coeffs.get(m, QI(0)) + QI(re, im)
        return cls(coeffs, d.get("degree"), int(d.get("pi_exp", 0)))

    def __repr__(self):
        return f"HarmonicField(degree={self.degree}, terms={len(self.coeffs)}, pi_exp={self.pi_exp})"


def reduced_monomials(degree: int) -> Iterable[Mono]:
    """All reduced monomials of total degree ``<= degree``."""
    for d in range(degree + 1):
        for a1 in range(d + 1):
            for a2 in range(d - a1 + 1):
                for b1 in range(d - a1 - a2 + 1):
                    b2 = d - a1 - a2 - b1
                    if min(a2, b2) == 0:
                        yield (a1, a2, b1, b2)


def frame_apply(field: HarmonicField, direction: str) -> HarmonicField:
    """Apply ``T``, ``Z1`` or ``Z1bar`` exactly."""
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    if field.degree > MAX_DEGREE:
        raise DegreeCapError(f"truncation degree {field.degree} exceeds the cap {MAX_DEGREE}")
    out: Dict[Mono, QI] = {}
    for m, c in field.coeffs.items():
        for r, w in _derive(m, direction):
            out[r] = out.get(r, QI(0)) + c * w
    return HarmonicField(out, field.degree, field.pi_exp)


def sublaplacian(field: HarmonicField) -> HarmonicField:
    """``Delta_b f = -(Z1 Z1bar + Z1bar Z1) f``."""
    zzb = frame_apply(frame_apply(field, "Z1bar"), "Z1")
    zbz = frame_apply(frame_apply(field, "Z1"), "Z1bar")
    return (zzb + zbz).scale(SUBLAPLACIAN_SIGN)


def mean_value(field: HarmonicField) -> Scalar:
    """Exact average over the sphere.

    Only ``|z1|^(2a)`` survives the torus average among reduced monomials,
    and its mean is ``1/(a+1)``.
    """
    acc = QI(0)
    for (a1, a2, b1, b2), c in field.coeffs.items():
        if a1 == b1 and a2 == b2 == 0:
            acc = acc + c * Fraction(1, a1 + 1)
    return Scalar(acc, field.pi_exp)


def integrate_exact(field: HarmonicField) -> Scalar:
    """``int f theta ^ d theta`` as an exact scalar."""
    return VOLUME * mean_value(field)


def integrate_density(field: HarmonicField) -> float:
    """``int f theta ^ d theta`` for a real field (imaginary part must vanish)."""
    val = integrate_exact(field)
    if val.im:
        raise ValueError("integral has a nonzero imaginary part; field is not real")
    return float(val.re) * math.pi**val.pi_exp


class PseudohermitianData:
    """Webster curvature ``R``, torsion ``A = A_11`` and connection data.

    ``connection`` maps frame directions to the components of
    ``omega_1^1``; only the ``Z1bar`` component enters the density. All
    fields are lifted to the common truncation ``degree`` (default: the
    largest field degree); a field truncated above ``degree`` is rejected.
    """

    def __init__(self, R: HarmonicField, A: Optional[HarmonicField] = None,
                 connection: Optional[Mapping[str, HarmonicField]] = None, degree: Optional[int] = None):
        A = A if A is not None else HarmonicField()
        connection = dict(connection or {})
        for k in connection:
            if k not in DIRECTIONS:
                raise ValueError(f"connection component {k!r} is not a frame direction")
        fields = [R, A, *connection.values()]
        if any(f.pi_exp != 0 for f in fields if f):
            raise ValueError("curvature, torsion and connection fields must be rational (pi_exp 0)")
        top = max(f.degree for f in fields)
        if degree is None:
            degree = top
        if top > degree:
            raise TruncationMismatch(f"field truncated at degree {top} above data degree {degree}")
        if not R.is_real:
            raise ValueError("R must be real")
        self.degree = degree
        self.R = R.with_degree(degree)
        self.A = A.with_degree(degree)
        self.connection = {k: v.with_degree(degree) for k, v in connection.items()}

    def torsion_term(self) -> HarmonicField:
        """``A_11,^11 = A_11,1bar1bar`` (see the conventions module)."""
        c = self.connection.get("Z1bar", HarmonicField())
        B = frame_apply(self.A, "Z1bar") - (c * self.A).scale(2)
        return frame_apply(B, "Z1bar") - c * B

    def to_json(self) -> dict:
        return {"degree": self.degree, "R": self.R.to_json(), "A": self.A.to_json(),
                "connection": {k: v.to_json() for k, v in self.connection.items()}}

    @classmethod
    def from_json(cls, d: Mapping) -> "PseudohermitianData":
        conn = {k: HarmonicField.from_json(v) for k, v in (d.get("connection") or {}).items()}
        A = HarmonicField.from_json(d["A"]) if d.get("A") else None
        return cls(HarmonicField.from_json(d["R"]), A, conn, d.get("degree"))


def psi_density(data: PseudohermitianData) -> HarmonicField:
    """``(Delta_b R - 2 Im A_11,^11) / (24 pi^2)``."""
    inner = sublaplacian(data.R) - data.torsion_term().imag.scale(2)
    return inner.scale(PSI_PREFACTOR)
