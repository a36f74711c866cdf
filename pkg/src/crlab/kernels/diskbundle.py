"""Fiber diagonals of disk bundles from a Hilbert polynomial.

With ``x = e^-rho`` the fiber sums are ``S = sum_{m>=0} P(m) x^m`` and
``B = sum_{m>=1} m P(m) x^m``. Writing ``P = sum_k b_k C(t+k, k)`` and
``y = 1/(1-x)`` gives the closed forms

    S = sum_k b_k y^(k+1),     B = sum_k b_k (k+1) y^(k+1) (y-1),

and since ``dy/drho = -(y^2 - y)`` the identity ``-dS/drho = B`` holds
term by term.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np


class ResolutionError(ValueError):
    """Too few Fourier samples for the requested mode."""


def _poly_mul(a: List[Fraction], b: List[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def binomial_basis(k: int) -> List[Fraction]:
    """Monomial coefficients of ``C(t+k, k) = (t+1)...(t+k)/k!``."""
    out = [Fraction(1)]
    for j in range(1, k + 1):
        out = _poly_mul(out, [Fraction(j), Fraction(1)])
    return [c / math.factorial(k) for c in out]


def bernoulli_plus(N: int) -> List[Fraction]:
    """``B_j`` with ``B_1 = +1/2``, i.e. ``t/(1-e^-t) = sum B_j t^j / j!``."""
    B = [Fraction(1)]
    for m in range(1, N + 1):
        B.append(-sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    if N >= 1:
        B[1] = Fraction(1, 2)
    return B


@dataclass(frozen=True)
class DiskBundleModel:
    """Hilbert polynomial ``P(t) = sum c_k t^k`` of degree ``n - 1``."""

    n: int
    coeffs: Tuple[Fraction, ...]

    def __init__(self, n: int, coeffs: Sequence):
        cs = tuple(Fraction(c) if not isinstance(c, float) else Fraction(str(c)) for c in coeffs)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "coeffs", cs)
        if self.n < 1 or len(cs) != self.n or cs[-1] == 0:
            raise ValueError(f"need exactly n={n} coefficients with nonzero top coefficient")
        if cs[-1] < 0:
            raise ValueError("P(m) must be positive for large m")
        # every real root lies below the Cauchy bound
        bound = 1 + max((abs(c / cs[-1]) for c in cs[:-1]), default=0)
        for m in range(1, int(math.ceil(bound)) + 2):
            if self.P(m) <= 0:
                raise ValueError(f"P({m}) = {self.P(m)} is not positive")

    @classmethod
    def from_string(cls, text: str) -> "DiskBundleModel":
        parts = [p.strip() for p in text.split(",") if p.strip()]
        return cls(len(parts), [Fraction(p) for p in parts])

    def P(self, t) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def P_float(self, t):
        t = np.asarray(t, dtype=float)
        acc = np.zeros_like(t)
        for c in reversed(self.coeffs):
            acc = acc * t + float(c)
        return acc

    def binomial_coeffs(self) -> List[Fraction]:
        """``b_k`` with ``P(t) = sum b_k C(t+k, k)``."""
        rem = list(self.coeffs)
        b = [Fraction(0)] * self.n
        for k in range(self.n - 1, -1, -1):
            basis = binomial_basis(k)
            b[k] = rem[k] / basis[k]
            for j in range(k + 1):
                rem[j] -= b[k] * basis[j]
        return b

    def laplace_symbol(self) -> List[Fraction]:
        """Coefficients ``a_j`` with ``sum a_j j! rho^(-j-1)`` the singular part of ``S``.

        Built from the Laurent expansion of ``y`` (Bernoulli numbers), not
        from ``P`` directly.
        """
        n = self.n
        b = self.binomial_coeffs()
        B = bernoulli_plus(n)
        ry = [B[j] / math.factorial(j) for j in range(n + 1)]  # rho * y
        sing = [Fraction(0)] * n  # coefficient of rho^(-j-1)
        power = [Fraction(1)]
        for k in range(n):
            power = _poly_mul(power, ry)[: n + 1]
            for j in range(k + 1):
                sing[j] += b[k] * power[k - j]
        return [sing[j] / math.factorial(j) for j in range(n)]


def fiber_polynomial(model: DiskBundleModel, kind: str) -> List[Fraction]:
    """Exact coefficients in ``y = 1/(1 - e^-rho)`` of a fiber diagonal."""
    b = model.binomial_coeffs()
    out = [Fraction(0)] * (model.n + 2)
    for k, bk in enumerate(b):
        if kind in ("szego", "catlin"):
            out[k + 1] += bk
        if kind in ("bergman", "catlin"):
            out[k + 2] += bk * (k + 1)
            out[k + 1] -= bk * (k + 1)
        if kind not in ("szego", "bergman", "catlin"):
            raise ValueError(f"unknown kernel kind {kind!r}")
    return out


def poly_derivative(c: Sequence[Fraction]) -> List[Fraction]:
    return [c[i] * i for i in range(1, len(c))] or [Fraction(0)]


def minus_rho_derivative(c: Sequence[Fraction]) -> List[Fraction]:
    """``-d/drho`` of ``sum c_i y^i`` as a polynomial in ``y``; uses ``dy/drho = y - y^2``."""
    d = poly_derivative(c)
    out = [Fraction(0)] * (len(d) + 2)
    for i, x in enumerate(d):
        out[i + 2] += x
        out[i + 1] -= x
    return out


def poly_equal(a: Sequence[Fraction], b: Sequence[Fraction]) -> bool:
    n = max(len(a), len(b))
    pad = lambda c: list(c) + [Fraction(0)] * (n - len(c))  # noqa: E731
    return pad(a) == pad(b)


def _y(rho):
    return -1.0 / np.expm1(-np.asarray(rho, dtype=float))


def eval_y_poly(c: Sequence[Fraction], rho):
    y = _y(rho)
    acc = np.zeros_like(y)
    for x in reversed(c):
        acc = acc * y + float(x)
    return acc


def diskbundle_fiber(model: DiskBundleModel, kind: str, rho):
    """Fiber diagonal: ``szego``, ``bergman`` or ``catlin`` (= szego + bergman)."""
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr <= 0):
        raise ValueError("rho must be positive")
    out = eval_y_poly(fiber_polynomial(model, kind), rho_arr)
    return float(out) if np.ndim(out) == 0 else out


def fiber_truncated(model: DiskBundleModel, kind: str, rho: float, terms: int) -> float:
    """Direct partial sum over ``m <= terms`` (reference for the closed forms)."""
    m = np.arange(terms + 1, dtype=float)
    w = {"szego": np.ones_like(m), "bergman": m, "catlin": m + 1.0}[kind]
    return math.fsum(w * model.P_float(m) * np.exp(-m * rho))


def fourier_mode_check(model: DiskBundleModel, m: int, rho: float, samples: Optional[int] = None,
                       terms: Optional[int] = None, tol: float = 1e-12) -> Tuple[float, float]:
    """``m``-th Fourier coefficient of the rotated fiber Szego kernel, and ``a(m)``.

    The kernel along the fiber circle, ``sum_j P(j) e^(-j rho) e^(i j phi)``,
    is summed to ``terms`` (default ``samples - 1``, which leaves no
    aliasing) and sampled at ``samples >= 4(m+1)`` angles. The mode is read
    off with an FFT. The second value is ``a(m)`` for the symbol ``a`` whose
    Laplace transform reproduces the singular part of the fiber kernel; it
    carries no ``e^(-m rho)`` factor, so the two agree at ``rho = 0``.
    """
    if m < 0 or rho < 0:
        raise ValueError("need m >= 0 and rho >= 0")
    N = samples if samples is not None else 4 * (m + 1)
    if N < 4 * (m + 1):
        raise ResolutionError(f"{N} samples cannot resolve mode {m}; need at least {4 * (m + 1)}")
    J = N - 1 if terms is None else int(terms)
    j = np.arange(J + 1, dtype=float)
    a = model.P_float(j) * np.exp(-j * rho)
    alias = sum(abs(a[i]) for i in range(m + N, J + 1, N))
    if alias > tol * max(abs(a[m]) if m <= J else 0.0, 1.0):
        raise ResolutionError(f"aliased tail {alias:.3e} exceeds tolerance for mode {m}")
    phi = 2.0 * np.pi * np.arange(N) / N
    if J < N:
        # the series is a trigonometric polynomial of degree < N: evaluate at roots of unity
        f = N * np.fft.ifft(np.concatenate([a, np.zeros(N - J - 1)]))
    else:
        f = np.zeros(N, dtype=complex)
        for jj in range(J + 1):
            f += a[jj] * np.exp(1j * jj * phi)
    mode = np.fft.fft(f)[m] / N
    symbol = model.laplace_symbol()
    laplace_value = float(sum(c * Fraction(m) ** k for k, c in enumerate(symbol)))
    return float(mode.real), laplace_value
