"""Finite expansions ``sum_j a_j Phi_j(t)`` modulo smooth functions.

The basis is

    Phi_j(t) = j! t^{-j-1}                          (j >= 0)
    Phi_j(t) = (-1)^j / (-j-1)! t^{-j-1} log t      (j < 0)

so that ``Phi_{-1} = -log t``. With that sign the derivative rule is uniform,
``d/dt Phi_j = -Phi_{j+1}`` modulo smooth functions, and multiplication by
``t`` acts as ``t Phi_j = j Phi_{j-1}``. Neither rule is stated alongside the
basis in the literature we follow; both are derived here and checked
numerically in the test-suite.

Expansions are classes modulo smooth functions: every smooth remainder is
dropped as soon as it appears, so two expansions are equal exactly when their
coefficient maps are equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Dict, Mapping, Union

from .exact import Scalar, inv_two_pi_i

DEFAULT_LOWER = -16


class PreconditionError(ValueError):
    """Raised when an operation's hypothesis does not hold."""


def phi_eval(j: int, t: float) -> float:
    """Evaluate ``Phi_j(t)`` for real ``t > 0`` (principal branch of log)."""
    if not t > 0:
        raise ValueError(f"Phi_j is evaluated on t > 0 only, got t={t!r}")
    if j >= 0:
        return math.factorial(j) * t ** (-j - 1)
    return (-1) ** j / math.factorial(-j - 1) * t ** (-j - 1) * math.log(t)


def _falling(j: int, m: int) -> int:
    out = 1
    for i in range(m):
        out *= j - i
    return out


@dataclass(frozen=True)
class SmoothSeries:
    """Truncated power series ``c_0 + c_1 t + ... + c_D t^D``."""

    coeffs: tuple

    def __init__(self, coeffs, depth: int | None = None):
        cs = [Scalar.coerce(c) for c in coeffs]
        if depth is None:
            depth = max(len(cs) - 1, 0)
        if depth < 0:
            raise ValueError("depth must be >= 0")
        cs = (cs + [Scalar(0)] * (depth + 1))[: depth + 1]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def depth(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def monomial(cls, m: int, c=1) -> "SmoothSeries":
        return cls([0] * m + [c])

    def __bool__(self):
        return any(self.coeffs)

    def __add__(self, other: "SmoothSeries") -> "SmoothSeries":
        d = min(self.depth, other.depth)
        return SmoothSeries([a + b for a, b in zip(self.coeffs, other.coeffs)], d)

    def __neg__(self):
        return SmoothSeries([-c for c in self.coeffs], self.depth)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SmoothSeries":
        c = Scalar.coerce(c)
        return SmoothSeries([c * x for x in self.coeffs], self.depth)

    def __mul__(self, other):
        if isinstance(other, SmoothSeries):
            d = min(self.depth, other.depth)
            out = [Scalar(0)] * (d + 1)
            for i, a in enumerate(self.coeffs[: d + 1]):
                if not a:
                    continue
                for k, b in enumerate(other.coeffs[: d + 1 - i]):
                    out[i + k] = out[i + k] + a * b
            return SmoothSeries(out, d)
        return self.scale(other)

    __rmul__ = __mul__

    def value(self, t: float) -> complex:
        return sum(complex(c) * t**k for k, c in enumerate(self.coeffs))

    def shift_down(self) -> "SmoothSeries":
        """Divide by the variable; requires ``c_0 == 0``."""
        if self.coeffs[0]:
            raise PreconditionError("series has a nonzero constant term")
        return SmoothSeries(self.coeffs[1:], max(self.depth - 1, 0))

    def shift_up(self) -> "SmoothSeries":
        return SmoothSeries((Scalar(0),) + self.coeffs, self.depth + 1)


Coeff = Union[Scalar, SmoothSeries]


def _is_zero(c: Coeff) -> bool:
    return not bool(c)


@dataclass(frozen=True)
class MicroExpansion:
    """Finite combination ``sum_j a_j Phi_j`` with ``lower <= j``.

    Coefficients are :class:`Scalar` values or, for families depending on an
    auxiliary parameter, :class:`SmoothSeries` in that parameter.
    """

    terms: Mapping[int, Coeff] = field(default_factory=dict)
    lower: int = DEFAULT_LOWER

    def __post_init__(self):
        clean: Dict[int, Coeff] = {}
        for j, c in self.terms.items():
            if not isinstance(c, SmoothSeries):
                c = Scalar.coerce(c)
            if j >= self.lower and not _is_zero(c):
                clean[int(j)] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items(), reverse=True)))

    @property
    def order(self) -> int | None:
        """Largest j with a nonzero coefficient, or None for the zero class."""
        return next(iter(self.terms), None)

    @property
    def nondegenerate(self) -> bool:
        """True when the top coefficient is nonzero at the base point.

        For parameter-dependent coefficients this means a nonzero constant term.
        """
        k = self.order
        if k is None:
            return False
        c = self.terms[k]
        return bool(c.coeffs[0]) if isinstance(c, SmoothSeries) else True

    def __eq__(self, other):
        if not isinstance(other, MicroExpansion):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __add__(self, other: "MicroExpansion") -> "MicroExpansion":
        lower = max(self.lower, other.lower)
        out = dict(self.terms)
        for j, c in other.terms.items():
            out[j] = out[j] + c if j in out else c
        return MicroExpansion(out, lower)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "MicroExpansion":
        return MicroExpansion({j: a * c if isinstance(a, SmoothSeries) else a * Scalar.coerce(c)
                               for j, a in self.terms.items()}, self.lower)

    def evaluate(self, t: float, param: float | None = None) -> complex:
        """Value of the representative ``sum a_j Phi_j(t)``."""
        total = 0j
        for j, c in self.terms.items():
            if isinstance(c, SmoothSeries):
                if param is None:
                    raise ValueError("parameter value required for series coefficients")
                cv = c.value(param)
            else:
                cv = complex(c)
            total += cv * phi_eval(j, t)
        return total

    def to_json(self) -> dict:
        terms = []
        for j, c in self.terms.items():
            if isinstance(c, SmoothSeries):
                terms.append({"j": j, "series": [x.to_json() for x in c.coeffs]})
            else:
                terms.append({"j": j, **c.to_json()})
        return {"order": self.order, "lower": self.lower, "terms": terms}

    @classmethod
    def from_json(cls, d: dict) -> "MicroExpansion":
        terms = {}
        for t in d["terms"]:
            if "series" in t:
                terms[t["j"]] = SmoothSeries([Scalar.from_json(x) for x in t["series"]])
            else:
                terms[t["j"]] = Scalar.from_json(t)
        return cls(terms, d.get("lower", DEFAULT_LOWER))


def phi(j: int, c=1, lower: int = DEFAULT_LOWER) -> MicroExpansion:
    """The single-term expansion ``c * Phi_j``."""
    return MicroExpansion({j: c}, lower)


def standard_section(kind: str) -> MicroExpansion:
    """Delta section ``(-2 pi i t)^{-1}`` or Heaviside section ``(-2 pi i)^{-1} log t``."""
    k = inv_two_pi_i()
    if kind == "delta":
        return MicroExpansion({0: k})
    if kind == "heaviside":
        # log t = -Phi_{-1}
        return MicroExpansion({-1: -k})
    raise ValueError(f"unknown section kind {kind!r}")


def differentiate(u: MicroExpansion) -> MicroExpansion:
    """d/dt term by term: ``Phi_j -> -Phi_{j+1}`` (smooth remainders dropped)."""
    return MicroExpansion({j + 1: -c for j, c in u.terms.items()}, u.lower + 1)


def integrate(u: MicroExpansion) -> MicroExpansion:
    """Inverse of :func:`differentiate`: ``Phi_j -> -Phi_{j-1}``."""
    return MicroExpansion({j - 1: -c for j, c in u.terms.items()}, u.lower)


def multiply_smooth(u: MicroExpansion, f: SmoothSeries) -> MicroExpansion:
    """Multiply by ``f(t) = sum c_m t^m`` using ``t^m Phi_j = j(j-1)...(j-m+1) Phi_{j-m}``."""
    out: Dict[int, Coeff] = {}
    for j, a in u.terms.items():
        for m, c in enumerate(f.coeffs):
            if not c:
                continue
            fall = _falling(j, m)
            if fall == 0 or j - m < u.lower:
                continue
            term = a * (c * fall) if isinstance(a, SmoothSeries) else a * c * fall
            out[j - m] = out[j - m] + term if j - m in out else term
    return MicroExpansion(out, u.lower)


def multiply_parameter(u: MicroExpansion) -> MicroExpansion:
    """Multiply a parameter-dependent expansion by the parameter."""
    return MicroExpansion({j: c.shift_up() for j, c in u.terms.items()}, u.lower)


def divide_by_parameter(u: MicroExpansion) -> MicroExpansion:
    """Return ``v`` with ``u = eps * v``; requires every coefficient to vanish at eps = 0."""
    out = {}
    for j, c in u.terms.items():
        if not isinstance(c, SmoothSeries):
            raise PreconditionError(
                f"coefficient of Phi_{j} is not a series in the parameter")
        if c.coeffs[0]:
            raise PreconditionError(
                f"coefficient of Phi_{j} does not vanish at parameter 0")
        out[j] = c.shift_down()
    return MicroExpansion(out, u.lower)


def laplace_from_symbol(a: Mapping[int, object], lower: int = DEFAULT_LOWER) -> MicroExpansion:
    """Laplace transform of the symbol ``sum a_j t^j``.

    For j >= 0, ``int_0^inf e^{-t rho} t^j dt = j! rho^{-j-1} = Phi_j(rho)``;
    for j < 0 the regularized transform agrees with ``Phi_j`` modulo smooth terms.
    """
    return MicroExpansion({int(j): Scalar.coerce(c) if not isinstance(c, Scalar) else c
                           for j, c in a.items()}, lower)


def singular_coefficients(u: MicroExpansion) -> Dict[int, complex]:
    """Coefficients of ``rho^{-j-1}`` (pole part) of a Scalar expansion: ``j! a_j``."""
    return {j + 1: complex(c) * math.factorial(j) for j, c in u.terms.items() if j >= 0}
