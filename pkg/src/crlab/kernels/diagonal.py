"""Kernel diagonals by monomial summation, with tail control."""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ._backend import diagonal_log_sums
from .norms import LOG_PI2, NormTable, table_size
from .profile import GeometryError


class TruncationError(RuntimeError):
    """Summation tail exceeds the requested tolerance."""

    def __init__(self, message: str, bound: float):
        super().__init__(message)
        self.bound = bound


class DiagonalValue(float):
    """Kernel value with its truncation diagnostics attached."""

    partial: float
    tail_lower: float
    tail_upper: float
    tail_estimate: float
    tail_bound: float
    bound_kind: str
    terms: int

    def __new__(cls, value, **diag):
        obj = super().__new__(cls, value)
        for k, v in diag.items():
            setattr(obj, k, v)
        return obj


def ball_reference(n: int, kind: str, rho: float) -> float:
    """Unit-ball diagonals at ``rho = 1 - |z|^2`` for Lebesgue ``dv``."""
    if not 0 < rho <= 1:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    if n < 1:
        raise ValueError("dimension must be positive")
    if kind == "bergman":
        return math.factorial(n) / math.pi**n * rho ** (-n - 1)
    if kind == "szego":
        return math.factorial(n - 1) / math.pi**n * rho ** (-n)
    raise ValueError(f"unknown kernel kind {kind!r}")


def _poly_weight(kind: str, k: np.ndarray) -> np.ndarray:
    # growth of a degree sum near the boundary: (k+1) x^k for szego, (k+1)(k+2) x^k for bergman
    return np.log(k + 1.0) if kind == "szego" else np.log(k + 1.0) + np.log(k + 2.0)


def _ratio_tail(kind: str, logT: np.ndarray, M: int) -> Tuple[float, float]:
    """Tail estimate from the last degree sums and a crude error for it."""
    if M < 3:
        return math.inf, math.inf
    k = np.arange(M - 2, M + 1, dtype=float)
    c = logT[M - 2: M + 1] - _poly_weight(kind, k)
    if not np.all(np.isfinite(c)):
        return 0.0, 0.0
    ests = []
    for lo in (0, 1):
        lx = c[lo + 1] - c[lo]
        if not lx < 0:
            return math.inf, math.inf
        jmax = int(min(2_000_000, math.ceil(50.0 / -lx))) + 1
        j = np.arange(1, jmax + 1, dtype=float)
        terms = np.exp(c[2] + j * lx + _poly_weight(kind, M + j))
        ests.append(math.fsum(terms))
    return ests[1], abs(ests[1] - ests[0])


def _sandwich_tail(table: NormTable, kind: str, s0: float, M: int, total: float,
                   chunk: int = 1024, max_terms: int = 2_000_000) -> Tuple[float, float]:
    """Tail bounds from ``min_u G_k <= G_k(u) <= max_u G_k`` degree by degree."""
    rays = table.rays
    if s0 == 0.0:
        return 0.0, 0.0
    ls0 = math.log(s0)
    lo_sum, hi_sum = 0.0, 0.0
    hi_finite = s0 < rays.R.min() * (1 - 1e-12)
    k0 = M + 1
    while True:
        k1 = k0 + chunk - 1
        k = np.arange(k0, k1 + 1, dtype=float)
        if kind == "szego":
            logG = (k[:, None] + 1.0) * np.log(rays.R)[None, :] + rays.log_g[None, :]
        else:
            logG = rays.log_radial(k1, k0=k0)
        base = np.log(k + 1.0) + k * ls0 - LOG_PI2
        lo_terms = np.exp(base - logG.max(axis=1))
        lo_sum += math.fsum(lo_terms)
        if hi_finite:
            hi_terms = np.exp(base - logG.min(axis=1))
            hi_sum += math.fsum(hi_terms)
            last = hi_terms[-1]
        else:
            last = lo_terms[-1]
        if last <= 1e-18 * (total + lo_sum):
            break
        if k1 - M > max_terms:
            if hi_finite:
                hi_sum = math.inf
            break
        k0 = k1 + 1
    return lo_sum, (hi_sum if hi_finite else math.inf)


def kernel_diagonal(table: NormTable, kind: str, point: Sequence[float], M_cut: Optional[int] = None,
                    tol: Optional[float] = 1e-10, tail_correction: bool = False) -> DiagonalValue:
    """Szego or Bergman diagonal at ``(r1, r2) = (|z1|^2, |z2|^2)``.

    Sums ``r^a / |z^a|^2`` over ``|a| <= M_cut`` degree by degree (graded
    lexicographic order) and bounds the remainder. Each degree sum is
    sandwiched between ``(k+1) s^k / (pi^2 max_u G_k)`` and the same with
    ``min_u G_k``, where ``s = r1 + r2`` and ``G_k`` is the radial factor of
    the norms; the sandwich is exact for the ball. When the upper bound
    diverges the remainder is estimated from the decay of the last degrees
    and ``bound_kind`` is ``"ratio"``.

    With ``tail_correction`` the estimated remainder is added and the bound
    refers to the corrected value. ``tol`` is relative; ``None`` disables the
    check.
    """
    r1, r2 = (float(x) for x in point)
    M = table.A_max if M_cut is None else int(M_cut)
    if M > table.A_max or M < 0:
        raise ValueError(f"M_cut={M} outside 0..{table.A_max}")
    if r1 < 0 or r2 < 0:
        raise ValueError("point coordinates are squared moduli and must be non-negative")
    s0 = r1 + r2
    if s0 > 0:
        R0 = table.profile.boundary_radius(np.array([r1 / s0]))[0]
        if not s0 < R0:
            raise GeometryError(f"point {point} is not inside the domain")
    with np.errstate(divide="ignore"):
        lr1, lr2 = np.log(np.array([r1])), np.log(np.array([r2]))
    lognorms = np.ascontiguousarray(table.lognorms(kind)[: table_size(M)])
    logT = diagonal_log_sums(lr1, lr2, lognorms, M)[0]
    partial = math.fsum(np.exp(logT))

    lower, upper = _sandwich_tail(table, kind, s0, M, partial)
    r_est, r_err = _ratio_tail(kind, logT, M)
    if math.isfinite(r_est):
        r_est = min(max(r_est, lower), upper)
    candidates = []
    if math.isfinite(upper):
        candidates.append((0.5 * (upper - lower), 0.5 * (upper + lower), "sandwich"))
    if math.isfinite(r_err):
        candidates.append((r_err, r_est, "ratio"))
    if not candidates:
        candidates.append((math.inf, math.nan, "none"))
    err, est, how = min(candidates, key=lambda c: c[0])

    if tail_correction:
        value, bound, kind_label = partial + est, err, how
    elif math.isfinite(upper):
        value, bound, kind_label = partial, upper, "geometric"
    else:
        value, bound = partial, (2.0 * r_est if math.isfinite(r_est) else math.inf)
        kind_label = "ratio"
    out = DiagonalValue(value, partial=partial, tail_lower=lower, tail_upper=upper,
                        tail_estimate=est, tail_bound=bound, bound_kind=kind_label, terms=M)
    if tol is not None and not bound <= tol * abs(value):
        raise TruncationError(
            f"{kind} tail bound {bound:.3e} ({kind_label}) exceeds {tol:.1e} relative at {point}", bound)
    return out
