"""Monomial norm tables for Reinhardt domains.

Both norms reduce to one-dimensional integrals over the direction
``u = r1 / (r1 + r2)``. With ``r = s (u, 1-u)`` one has
``dr1 dr2 = s ds du`` and ``dV = (1/4) dr1 dr2 dtheta1 dtheta2``, so

    |z^a|^2_bdry = pi^2 int u^a1 (1-u)^a2 R^(k+1) e^(h-w) / |d_s p| du
    |z^a|^2_dom  = pi^2 int u^a1 (1-u)^a2 I_k(u) du,
    I_k(u, S)    = int_0^S s^(k+1) e^h ds,

where ``R(u)`` is the boundary radius and ``k = a1 + a2``. The boundary
measure is ``delta(rho) dv`` for ``rho = e^w p``. Norms of high degree
underflow doubles, so everything is kept as logarithms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
import os
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from ._backend import log_moments
from .poly import exp_series, ray_eval
from .profile import ReinhardtProfile

logger = logging.getLogger(__name__)

LOG_PI2 = 2.0 * math.log(math.pi)
_LN10 = math.log(10.0)


DEFAULT_QUAD_TOL = 1e-10


class ToleranceError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""


def _legendre_pair(c, n):
    p0, p1 = np.ones_like(c), c.copy()
    for j in range(1, n):
        p0, p1 = p1, ((2 * j + 1) * c * p1 - j * p0) / (j + 1)
    return p0, p1


def gauss_legendre_unit(n: int):
    """Gauss-Legendre rule on ``[0, 1]`` as ``(u, 1-u, weights)``.

    Nodes are polished in the angle ``x = cos(theta)`` in extended precision
    so that both ``u`` and ``1-u`` keep full relative accuracy near the
    endpoints; powers ``u^a`` with ``a ~ 10^3`` would otherwise lose digits.
    """
    x, _ = np.polynomial.legendre.leggauss(n)
    th = np.arccos(x).astype(np.longdouble)
    for _ in range(3):
        c = np.cos(th)
        p0, p1 = _legendre_pair(c, n)
        th = th - p1 * np.sin(th) / (n * (c * p1 - p0))
    c = np.cos(th)
    p0, p1 = _legendre_pair(c, n)
    s = np.sin(th)
    dP = n * (c * p1 - p0) / (c * c - 1)
    u = np.sin(th / 2) ** 2
    v = np.cos(th / 2) ** 2
    w = 1.0 / (s * s * dP * dP)
    order = np.argsort(u)
    return u[order].astype(float), v[order].astype(float), w[order].astype(float)


def graded_index(a1: int, a2: int) -> int:
    k = a1 + a2
    return k * (k + 1) // 2 + a1


def table_size(A_max: int) -> int:
    return (A_max + 1) * (A_max + 2) // 2


@dataclass
class RayQuadrature:
    """Gauss-Legendre nodes in the direction variable with per-ray geometry."""

    profile: ReinhardtProfile
    n: int
    u: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)
    w: np.ndarray = field(init=False)
    R: np.ndarray = field(init=False)
    log_g: np.ndarray = field(init=False)
    h_min: np.ndarray = field(init=False)
    h_max: np.ndarray = field(init=False)

    def __post_init__(self):
        u, v, w = gauss_legendre_unit(self.n)
        prof = self.profile
        half = (self.n + 1) // 2
        if prof.is_symmetric():
            # mirror the rule so that swapping r1 and r2 permutes nodes exactly
            u = np.concatenate([u[:half], v[: self.n - half][::-1]])
            v = np.concatenate([v[:half], u[: self.n - half][::-1]])
            w = np.concatenate([w[:half], w[: self.n - half][::-1]])
        self.u, self.v, self.w = u, v, w
        # the axes must meet the boundary too, or the region is not compact
        prof.boundary_radius(np.array([0.0, 1.0]))
        R = prof.boundary_radius(u)
        prof.check_monotone(u, R)
        slope = prof.boundary_slope(u, R)
        rb1, rb2 = R * u, R * v
        log_g = prof.density(rb1, rb2) - prof.weight(rb1, rb2) - np.log(-slope)
        t = np.linspace(0.0, 1.0, 65)[:, None] * R
        hs = ray_eval(prof.density.ray_coefficients(u), t)
        h_min, h_max = hs.min(axis=0), hs.max(axis=0)
        if prof.is_symmetric():
            mirror = lambda a: np.concatenate([a[:half], a[: self.n - half][::-1]])  # noqa: E731
            R, log_g, h_min, h_max = (mirror(a) for a in (R, log_g, h_min, h_max))
        self.R, self.log_g, self.h_min, self.h_max = R, log_g, h_min, h_max

    @property
    def lu(self) -> np.ndarray:
        return np.log(self.u)

    @property
    def lv(self) -> np.ndarray:
        return np.log(self.v)

    def log_radial(self, K: int, S: Optional[np.ndarray] = None, k0: int = 0) -> np.ndarray:
        """``log I_k(u_i, S_i)`` for ``k = k0..K``, shape ``(K-k0+1, n)``."""
        S = self.R if S is None else S
        k = np.arange(k0, K + 1, dtype=float)[:, None]
        base = (k + 2.0) * np.log(S)[None, :]
        H = self.profile.density.ray_coefficients(self.u)
        if not self.profile.density or (H.shape[0] == 1):
            return base + H[0][None, :] - np.log(k + 2.0)
        e = exp_series(H, 2)
        acc = np.zeros((k.size, self.n))
        Sj = np.ones(self.n)
        scale = np.abs(e[0])
        j = 0
        while True:
            if j >= e.shape[0]:
                e = exp_series(H, 2 * e.shape[0])
            term = e[j] * Sj
            acc += term[None, :] / (k + 2.0 + j)
            if j > 4 and np.all(np.abs(term) <= 1e-18 * scale):
                break
            if j > 400:
                raise ToleranceError("density exponential series did not converge")
            Sj = Sj * S
            j += 1
        return base + np.log(acc)

    def log_boundary_weights(self, K: int) -> np.ndarray:
        k = np.arange(K + 1, dtype=float)[:, None]
        return np.log(self.w)[None, :] + (k + 1.0) * np.log(self.R)[None, :] + self.log_g[None, :]

    def log_domain_weights(self, K: int) -> np.ndarray:
        return np.log(self.w)[None, :] + self.log_radial(K)


@dataclass
class NormTable:
    """Graded table of log norms ``log |z^a|^2`` for ``|a| <= A_max``."""

    profile: ReinhardtProfile
    A_max: int
    quad_tol: float
    n_nodes: int
    log_boundary: np.ndarray
    log_domain: np.ndarray
    _rays: Optional[RayQuadrature] = field(default=None, repr=False)
    _text: Optional[tuple] = field(default=None, repr=False)

    @property
    def profile_hash(self) -> str:
        return self.profile.profile_hash()

    @property
    def rays(self) -> RayQuadrature:
        if self._rays is None:
            self._rays = RayQuadrature(self.profile, self.n_nodes)
        return self._rays

    def lognorms(self, kind: str) -> np.ndarray:
        if kind == "szego":
            return self.log_boundary
        if kind == "bergman":
            return self.log_domain
        raise ValueError(f"unknown kernel kind {kind!r}")

    def log_norm(self, kind: str, a1: int, a2: int) -> float:
        if a1 < 0 or a2 < 0 or a1 + a2 > self.A_max:
            raise IndexError(f"multi-index ({a1}, {a2}) outside the table")
        return float(self.lognorms(kind)[graded_index(a1, a2)])

    def boundary_norm(self, a1: int, a2: int) -> float:
        return math.exp(self.log_norm("szego", a1, a2))

    def domain_norm(self, a1: int, a2: int) -> float:
        return math.exp(self.log_norm("bergman", a1, a2))

    def truncated(self, A: int) -> "NormTable":
        m = table_size(A)
        text = None if self._text is None else (self._text[0][:m], self._text[1][:m])
        return NormTable(self.profile, A, self.quad_tol, self.n_nodes,
                         self.log_boundary[:m], self.log_domain[:m], self._rays, text)


def _compute_logs(rays: RayQuadrature, A_max: int):
    lb = log_moments(rays.lu, rays.lv, np.ascontiguousarray(rays.log_boundary_weights(A_max))) + LOG_PI2
    ld = log_moments(rays.lu, rays.lv, np.ascontiguousarray(rays.log_domain_weights(A_max))) + LOG_PI2
    return lb, ld


def _sample_logs(rays: RayQuadrature, alphas):
    Kmax = max(a1 + a2 for a1, a2 in alphas)
    Cb = rays.log_boundary_weights(Kmax)
    Cd = rays.log_domain_weights(Kmax)
    out = []
    for a1, a2 in alphas:
        t = a1 * rays.lu + a2 * rays.lv
        out.append((logsumexp(t + Cb[a1 + a2]), logsumexp(t + Cd[a1 + a2])))
    return np.array(out) + LOG_PI2


def _probe_alphas(A_max: int):
    ks = sorted({0, 1, A_max // 4, A_max // 2, (3 * A_max) // 4, A_max})
    return sorted({(a, k - a) for k in ks for a in (0, k // 3, k // 2, k)})


def default_nodes(A_max: int) -> int:
    # Gauss-Legendre with n nodes is exact for degree 2n-1; ball integrands have degree A_max
    return max(32, (A_max + 1) // 2 + 24)


def monomial_norms(profile: ReinhardtProfile, A_max: int, quad_tol: float = DEFAULT_QUAD_TOL,
                   n_nodes: Optional[int] = None, max_nodes: Optional[int] = None) -> NormTable:
    """Boundary and domain norms of all monomials of degree at most ``A_max``.

    The node count grows by factors of 1.5 until probe norms at ``n`` and
    ``1.5 n`` nodes agree to ``quad_tol`` (relative).
    """
    if A_max < 0:
        raise ValueError("A_max must be non-negative")
    n = n_nodes or default_nodes(A_max)
    cap = max_nodes or 4 * n + 256
    probes = _probe_alphas(A_max)
    while True:
        rays = RayQuadrature(profile, n)
        fine = RayQuadrature(profile, int(math.ceil(1.5 * n)))
        err = np.max(np.abs(np.expm1(_sample_logs(rays, probes) - _sample_logs(fine, probes))))
        if err <= quad_tol:
            break
        if n >= cap:
            raise ToleranceError(f"norm quadrature error {err:.3e} > {quad_tol:.1e} with {n} nodes")
        n = min(cap, int(math.ceil(1.5 * n)))
    lb, ld = _compute_logs(rays, A_max)
    if profile.is_symmetric():
        swap = np.array([graded_index(k - a, a) for k in range(A_max + 1) for a in range(k + 1)])
        upper = np.array([a <= k - a for k in range(A_max + 1) for a in range(k + 1)])
        lb = np.where(upper, lb, lb[swap])
        ld = np.where(upper, ld, ld[swap])
    table = NormTable(profile, A_max, quad_tol, n, lb, ld, rays)
    # the cached text form is canonical; round-trip so cold and warm runs agree bitwise
    return _roundtrip(table)


def format_log(L: float) -> str:
    """Decimal text of ``exp(L)`` that survives magnitudes far outside double range."""
    e10 = L / _LN10
    E = math.floor(e10)
    m = 10.0 ** (e10 - E)
    return f"{m:.17g}e{E:+d}"


def parse_log(text: str) -> float:
    mant, _, exp = text.strip().lower().partition("e")
    m = float(mant)
    if m <= 0 or not math.isfinite(m):
        raise ValueError(f"norm must be positive and finite: {text!r}")
    return math.log(m) + int(exp or 0) * _LN10


def _roundtrip(table: NormTable) -> NormTable:
    tb = [format_log(x) for x in table.log_boundary]
    td = [format_log(x) for x in table.log_domain]
    table.log_boundary = np.array([parse_log(t) for t in tb])
    table.log_domain = np.array([parse_log(t) for t in td])
    table._text = (tb, td)
    return table


def cache_path(cache_dir, profile: ReinhardtProfile, A_max: int, quad_tol: float) -> Path:
    return Path(cache_dir) / f"norms_{profile.profile_hash()}_A{A_max}_tol{quad_tol:.0e}.csv"


def write_cache(path, table: NormTable) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        fh.write(f"# profile_hash={table.profile_hash}\n")
        fh.write(f"# A_max={table.A_max}\n")
        fh.write(f"# quad_tol={table.quad_tol!r}\n")
        fh.write(f"# n_nodes={table.n_nodes}\n")
        fh.write("alpha1,alpha2,norm_boundary,norm_domain\n")
        if table._text is None:
            _roundtrip(table)
        tb, td = table._text
        for k in range(table.A_max + 1):
            for a1 in range(k + 1):
                i = graded_index(a1, k - a1)
                fh.write(f"{a1},{k - a1},{tb[i]},{td[i]}\n")
    os.replace(tmp, path)


def read_cache(path, profile: ReinhardtProfile) -> NormTable:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
            elif line.startswith("alpha1"):
                continue
            else:
                rows.append(line.split(","))
    if meta.get("profile_hash") != profile.profile_hash():
        raise ValueError("cache belongs to a different profile")
    A_max = int(meta["A_max"])
    size = table_size(A_max)
    if len(rows) != size:
        raise ValueError(f"cache has {len(rows)} rows, expected {size}")
    lb = np.full(size, np.nan)
    ld = np.full(size, np.nan)
    tb, td = [""] * size, [""] * size
    for r in rows:
        a1, a2 = int(r[0]), int(r[1])
        i = graded_index(a1, a2)
        lb[i], ld[i] = parse_log(r[2]), parse_log(r[3])
        tb[i], td[i] = r[2].strip(), r[3].strip()
    if np.any(np.isnan(lb)) or np.any(np.isnan(ld)):
        raise ValueError("cache is missing table entries")
    return NormTable(profile, A_max, float(meta["quad_tol"]), int(meta["n_nodes"]), lb, ld, None, (tb, td))


def cached_norms(profile: ReinhardtProfile, A_max: int, quad_tol: float = DEFAULT_QUAD_TOL,
                 cache_dir=None) -> NormTable:
    """``monomial_norms`` through an on-disk cache keyed by (profile, A_max, quad_tol)."""
    if cache_dir is None:
        return monomial_norms(profile, A_max, quad_tol)
    path = cache_path(cache_dir, profile, A_max, quad_tol)
    if path.exists():
        try:
            return read_cache(path, profile)
        except (ValueError, KeyError, IndexError) as exc:
            logger.warning("rebuilding corrupt norm cache %s: %s", path, exc)
    table = monomial_norms(profile, A_max, quad_tol)
    write_cache(path, table)
    return table
