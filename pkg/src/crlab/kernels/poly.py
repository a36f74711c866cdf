"""Exact bivariate polynomials in ``(r1, r2)`` and their restriction to rays."""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Tuple

import numpy as np

Key = Tuple[int, int]


class Poly2:
    """Polynomial ``sum c_ij r1^i r2^j`` with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, object] = ()):
        clean: Dict[Key, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (i, j), c in items:
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent in r1^{i} r2^{j}")
            c = Fraction(c) if not isinstance(c, float) else Fraction(str(c))
            if c:
                clean[(int(i), int(j))] = clean.get((int(i), int(j)), Fraction(0)) + c
        self.terms = {k: v for k, v in sorted(clean.items()) if v}

    @classmethod
    def constant(cls, c) -> "Poly2":
        return cls({(0, 0): c})

    @classmethod
    def var(cls, which: int) -> "Poly2":
        return cls({(1, 0) if which == 1 else (0, 1): 1})

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        out: Dict[Key, Fraction] = {}
        for (a, b), c in self.terms.items():
            for (d, e), f in other.terms.items():
                k = (a + d, b + e)
                out[k] = out.get(k, Fraction(0)) + c * f
        return Poly2(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly2.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            return self.terms == _coerce(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Poly2({self.canonical()})"

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    def coeff(self, i: int, j: int) -> Fraction:
        return self.terms.get((i, j), Fraction(0))

    def canonical(self) -> str:
        """Stable text form used for hashing (independent of input spelling)."""
        return ";".join(f"{i},{j}:{c}" for (i, j), c in self.terms.items()) or "0"

    def swap(self) -> "Poly2":
        return Poly2({(j, i): c for (i, j), c in self.terms.items()})

    def is_symmetric(self) -> bool:
        return self == self.swap()

    def partial(self, which: int) -> "Poly2":
        out = {}
        for (i, j), c in self.terms.items():
            e = i if which == 1 else j
            if e:
                out[(i - 1, j) if which == 1 else (i, j - 1)] = c * e
        return Poly2(out)

    def __call__(self, r1, r2):
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        out = np.zeros(np.broadcast(r1, r2).shape)
        for (i, j), c in self.terms.items():
            out = out + float(c) * r1**i * r2**j
        return out

    def ray_coefficients(self, u: np.ndarray) -> np.ndarray:
        """Coefficients ``P_d(u)`` of ``p(s u, s (1-u)) = sum_d P_d(u) s^d``.

        Returns an array of shape ``(degree + 1, len(u))``.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = 1.0 - u
        out = np.zeros((self.degree + 1, u.size))
        for (i, j), c in self.terms.items():
            out[i + j] += float(c) * u**i * v**j
        return out


def _coerce(x) -> Poly2:
    if isinstance(x, Poly2):
        return x
    if isinstance(x, (int, Fraction, float)):
        return Poly2.constant(x)
    raise TypeError(f"cannot treat {type(x).__name__} as a polynomial")


def ray_eval(coeffs: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Horner evaluation of per-ray coefficients at per-ray radii ``s``."""
    out = np.zeros_like(s, dtype=float)
    for c in coeffs[::-1]:
        out = out * s + c
    return out


def ray_derivative(coeffs: np.ndarray) -> np.ndarray:
    d = np.arange(1, coeffs.shape[0])[:, None]
    if coeffs.shape[0] == 1:
        return np.zeros_like(coeffs)
    return coeffs[1:] * d


def exp_series(coeffs: np.ndarray, terms: int) -> np.ndarray:
    """Taylor coefficients of ``exp(sum_d H_d s^d)`` in ``s``, per ray.

    Uses ``j e_j = sum_d d H_d e_{j-d}`` with ``e_0 = exp(H_0)``.
    """
    H = np.asarray(coeffs, dtype=float)
    deg = H.shape[0] - 1
    e = np.zeros((terms, H.shape[1]))
    e[0] = np.exp(H[0])
    for j in range(1, terms):
        acc = np.zeros(H.shape[1])
        for d in range(1, min(j, deg) + 1):
            acc += d * H[d] * e[j - d]
        e[j] = acc / j
    return e

