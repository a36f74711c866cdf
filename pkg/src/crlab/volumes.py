"""Volumes of sublevel sets and the log-term coefficient pipeline.

``Vol(eps)`` is the volume of ``{rho > eps}`` for the Bergman volume form
``B dv``. For Reinhardt domains it is computed as ``sum_a M_a(eps) / N_a``,
where ``M_a(eps)`` is the integral of ``|z^a|^2`` over the sublevel set and
``N_a`` the full domain norm. Both moments are integrals over the same
direction nodes, so

    Vol(eps) = sum_k sum_i D_k(i) lambda_k(i, eps),
    lambda_k(i, eps) = I_k(u_i, R_eps(u_i)) / I_k(u_i, R(u_i)),

with a per-node density ``D_k(i)`` that is independent of ``eps`` and sums
to ``k + 1``. Disk-bundle volumes are closed-form sums over the Hilbert
polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .asymfit import ExpansionFit, FitBasisSpec, SampleGrid, fit_expansion, geometric_grid_between
from .kernels import (
    DiskBundleModel, NormTable, ReinhardtProfile, cached_norms, diskbundle_fiber, eval_y_poly,
    fiber_polynomial, kernel_diagonal,
)
from .kernels._backend import diagonal_log_sums
from .kernels.diskbundle import bernoulli_plus
from .kernels.norms import DEFAULT_QUAD_TOL, LOG_PI2

logger = logging.getLogger(__name__)


class VolumeValue(float):
    """Volume with the summation diagnostics attached."""

    partial: float
    tail: float
    tail_error: float
    eps: float

    def __new__(cls, value, **diag):
        obj = super().__new__(cls, value)
        for k, v in diag.items():
            setattr(obj, k, v)
        return obj


class VolumeEngine:
    """Precomputed node densities for repeated volume evaluations on one table."""

    def __init__(self, table: NormTable):
        self.table = table
        rays = table.rays
        K = table.A_max
        self.K = K
        self.log_I = rays.log_radial(K)
        lsum = diagonal_log_sums(rays.lu, rays.lv, np.ascontiguousarray(table.log_domain), K)
        # D_k(i) = pi^2 w_i I_k(u_i) sum_a u_i^a1 v_i^a2 / N_a
        self.log_D = LOG_PI2 + np.log(rays.w)[None, :] + self.log_I + lsum.T
        mass = np.exp(self.log_D).sum(axis=1)
        self.mass_defect = float(np.max(np.abs(mass / np.arange(1, K + 2) - 1.0)))

    def volume(self, eps: float) -> VolumeValue:
        prof = self.table.profile
        rho0 = float(prof.rho(0.0, 0.0))
        if not 0 < eps < rho0:
            if eps >= rho0:
                return VolumeValue(0.0, partial=0.0, tail=0.0, tail_error=0.0, eps=eps)
            raise ValueError("eps must be positive")
        rays = self.table.rays
        K = self.K
        Re = prof.level_radius(rays.u, eps, rays.R)
        log_Ie = rays.log_radial(K, Re)
        log_lam = log_Ie - self.log_I
        partial = math.fsum(np.exp(self.log_D + log_lam).ravel())

        # remainder: D_k(i) ~ D_K(i) (k+1)/(K+1) and lambda_k ~ f_i x_i^(k+2)
        x = Re / rays.R
        f = np.exp(log_lam[K] - (K + 2) * np.log(x))

        def geometric(xx, K0):
            # sum_{k > K0} (k+1) x^(k+2)
            return xx**2 * xx ** (K0 + 1) * ((K0 + 2) - (K0 + 1) * xx) / (1.0 - xx) ** 2

        dens = np.exp(self.log_D[K]) / (K + 1)
        tail = math.fsum(dens * f * geometric(x, K))
        dens_prev = np.exp(self.log_D[K - 1]) / K if K > 0 else dens
        f_prev = np.exp(log_lam[K - 1] - (K + 1) * np.log(x)) if K > 0 else f
        tail_prev = math.fsum(dens_prev * f_prev * geometric(x, K))
        err = abs(tail - tail_prev) + self.mass_defect * tail
        return VolumeValue(partial + tail, partial=partial, tail=tail, tail_error=err, eps=eps)


def vol_quadrature(profile: ReinhardtProfile, eps: float, quad_tol: float = DEFAULT_QUAD_TOL,
                   A_max: int = 400, table: Optional[NormTable] = None, cache_dir=None) -> VolumeValue:
    """Bergman volume of ``{e^w p > eps}``."""
    if table is None:
        table = cached_norms(profile, A_max, quad_tol, cache_dir)
    return VolumeEngine(table).volume(eps)


def zeta_negative(k: int) -> Fraction:
    """``zeta(-k) = -B_(k+1) / (k+1)`` with the ``B_1 = +1/2`` convention."""
    return -bernoulli_plus(k + 1)[k + 1] / (k + 1)


def tube_volume(model: DiskBundleModel, eps: float, route: str = "exact_sum") -> float:
    """``sum_{m>=1} P(m) e^(-m eps)`` (closed form) or its Laplace counterpart.

    The ``laplace`` route is ``sum_k c_k k! eps^(-k-1)``, the transform of ``P``
    without any ``2 pi`` normalization.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if route == "exact_sum":
        return float(diskbundle_fiber(model, "szego", eps)) - float(model.P(0))
    if route == "laplace":
        return math.fsum(float(c) * math.factorial(k) * eps ** (-k - 1) for k, c in enumerate(model.coeffs))
    raise ValueError(f"unknown route {route!r}")


def tube_constant_term(model: DiskBundleModel) -> Fraction:
    """Constant term of the exact sum at ``eps -> 0``: ``sum_k c_k zeta(-k)``."""
    return sum((c * zeta_negative(k) for k, c in enumerate(model.coeffs)), Fraction(0))


def tube_singular_coefficients(model: DiskBundleModel) -> List[Fraction]:
    """``C_j`` of ``eps^(j-n)``: ``C_j = (n-1-j)! c_(n-1-j)``."""
    n = model.n
    return [math.factorial(n - 1 - j) * model.coeffs[n - 1 - j] for j in range(n)]


def catlin_check(model: DiskBundleModel, rho: float):
    """Weighted-norm fiber value versus Bergman plus Szego.

    The left side uses the norms ``1/(m+1)`` of the weight ``e^-rho dv``,
    i.e. the Hilbert polynomial ``(t+1) P(t)`` fed through the Szego closed
    form; the right side adds the two unweighted closed forms.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    shifted = DiskBundleModel(model.n + 1, _times_t_plus_1(model.coeffs))
    lhs = float(eval_y_poly(fiber_polynomial(shifted, "szego"), rho))
    rhs = float(diskbundle_fiber(model, "bergman", rho)) + float(diskbundle_fiber(model, "szego", rho))
    return lhs, rhs


def catlin_exact(model: DiskBundleModel) -> bool:
    shifted = DiskBundleModel(model.n + 1, _times_t_plus_1(model.coeffs))
    lhs = fiber_polynomial(shifted, "szego")
    rhs = fiber_polynomial(model, "catlin")
    n = max(len(lhs), len(rhs))
    return lhs + [Fraction(0)] * (n - len(lhs)) == rhs + [Fraction(0)] * (n - len(rhs))


def _times_t_plus_1(c: Sequence[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * (len(c) + 1)
    for i, x in enumerate(c):
        out[i] += x
        out[i + 1] += x
    return out


@dataclass
class VolumeExperiment:
    """One (model, volume element, defining function) configuration.

    ``eps`` and ``rho`` are ``(min, max, count)`` geometric grids for the
    volume fit and the boundary ray fits.
    """

    name: str
    model: Union[ReinhardtProfile, DiskBundleModel]
    eps: tuple = (0.02, 0.2, 64)
    rho: tuple = (0.02, 0.3, 20)
    fit: FitBasisSpec = field(default_factory=lambda: FitBasisSpec(2, 6, 3))
    ray_fit: Optional[FitBasisSpec] = None
    A_max: int = 1300
    quad_tol: float = DEFAULT_QUAD_TOL
    boundary_nodes: int = 48
    cache_dir: Optional[str] = None
    routes: tuple = ("volume", "szego")

    def eps_grid(self) -> np.ndarray:
        return geometric_grid_between(self.eps[0], self.eps[1], int(self.eps[2]))

    def rho_grid(self) -> np.ndarray:
        return geometric_grid_between(self.rho[0], self.rho[1], int(self.rho[2]))


@dataclass
class ConfigResult:
    name: str
    C: List[float]
    C_uncertainty: List[float]
    L_volume: Optional[float] = None
    L_volume_uncertainty: Optional[float] = None
    L_szego: Optional[float] = None
    L_szego_uncertainty: Optional[float] = None
    volume_fit: Optional[ExpansionFit] = None
    psi_hat: Optional[np.ndarray] = None
    psi_hat_uncertainty: Optional[np.ndarray] = None
    boundary_u: Optional[np.ndarray] = None
    samples: Dict[str, np.ndarray] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)

    def L_values(self):
        out = []
        if self.L_volume is not None:
            out.append(("volume", self.L_volume, self.L_volume_uncertainty))
        if self.L_szego is not None:
            out.append(("szego", self.L_szego, self.L_szego_uncertainty))
        return out


@dataclass
class LReport:
    configs: List[ConfigResult]

    @property
    def L_volume(self) -> List[Optional[float]]:
        return [c.L_volume for c in self.configs]

    @property
    def L_szego(self) -> List[Optional[float]]:
        return [c.L_szego for c in self.configs]

    def all_L(self):
        return [(c.name, route, L, u) for c in self.configs for route, L, u in c.L_values()]

    def agree(self) -> bool:
        """Pairwise ``|L_a - L_b| <= u_a + u_b`` over every route and configuration."""
        vals = self.all_L()
        return all(abs(a[2] - b[2]) <= a[3] + b[3] for i, a in enumerate(vals) for b in vals[i + 1:])

    def max_abs_L(self) -> float:
        return max((abs(v[2]) for v in self.all_L()), default=0.0)

    def C_spread(self) -> List[float]:
        n = min(len(c.C) for c in self.configs)
        return [max(c.C[j] for c in self.configs) - min(c.C[j] for c in self.configs) for j in range(n)]

    @property
    def flags(self) -> List[str]:
        return [f"{c.name}: {f}" for c in self.configs for f in c.flags]

    def to_json(self) -> dict:
        return {"configs": [{
            "name": c.name, "C": c.C, "C_uncertainty": c.C_uncertainty,
            "L_volume": c.L_volume, "L_volume_uncertainty": c.L_volume_uncertainty,
            "L_szego": c.L_szego, "L_szego_uncertainty": c.L_szego_uncertainty,
            "flags": c.flags,
        } for c in self.configs], "agree": self.agree(), "C_spread": self.C_spread()}


def _fit(eps, vals, basis, flags, label):
    fit = fit_expansion(SampleGrid(eps, vals), basis, basis_variation=True)
    if fit.ill_conditioned:
        flags.append(f"{label}: ill-conditioned fit (condition {fit.condition:.2e})")
    return fit


def szego_route(exp: VolumeExperiment, table: NormTable, flags: List[str]):
    """Log coefficients of the Szego diagonal along inward rays, integrated over the boundary."""
    from .kernels.norms import RayQuadrature

    prof = table.profile
    bnodes = RayQuadrature(prof, exp.boundary_nodes)
    rho = exp.rho_grid()
    basis = exp.ray_fit or FitBasisSpec(2, exp.fit.smooth, max(1, exp.fit.highlog))
    psi = np.empty(bnodes.n)
    psi_unc = np.empty(bnodes.n)
    values = np.empty((bnodes.n, rho.size))
    for i, u in enumerate(bnodes.u):
        uu = np.array([u])
        for j, r in enumerate(rho):
            s = prof.level_radius(uu, r, bnodes.R[i: i + 1])[0]
            pt = (s * u, s * bnodes.v[i])
            values[i, j] = kernel_diagonal(table, "szego", pt, tol=1e-6, tail_correction=True)
        fit = _fit(rho, values[i], basis, flags, f"ray u={u:.4f}")
        psi[i], psi_unc[i] = fit.L, fit.L_uncertainty
    # co-area surface element: pi^2 R e^(h-w) / |d_s p| du
    weights = math.pi**2 * bnodes.w * bnodes.R * np.exp(bnodes.log_g)
    L = math.fsum(weights * psi)
    L_unc = math.fsum(weights * psi_unc)
    return L, L_unc, psi, psi_unc, bnodes.u, values


def run_experiment(exp: VolumeExperiment) -> ConfigResult:
    flags: List[str] = []
    eps = exp.eps_grid()
    if isinstance(exp.model, DiskBundleModel):
        model = exp.model
        vols = np.array([tube_volume(model, e) for e in eps])
        basis = exp.fit if exp.fit.pole_order == model.n else FitBasisSpec(model.n, exp.fit.smooth, exp.fit.highlog)
        vfit = _fit(eps, vols, basis, flags, "volume")
        res = ConfigResult(exp.name, vfit.C, vfit.C_uncertainty, vfit.L, vfit.L_uncertainty, volume_fit=vfit,
                           samples={"eps": eps, "volume": vols})
        if "szego" in exp.routes:
            rho = exp.rho_grid()
            S = diskbundle_fiber(model, "szego", rho)
            sfit = _fit(rho, S, FitBasisSpec(model.n, basis.smooth, max(1, basis.highlog)), flags, "fiber")
            res.L_szego, res.L_szego_uncertainty = sfit.L, sfit.L_uncertainty
            res.samples.update({"rho": rho, "szego": S})
        res.flags = flags
        return res

    table = cached_norms(exp.model, exp.A_max, exp.quad_tol, exp.cache_dir)
    res = ConfigResult(exp.name, [], [])
    if "volume" in exp.routes:
        engine = VolumeEngine(table)
        vv = [engine.volume(e) for e in eps]
        vols = np.array([float(v) for v in vv])
        tail_err = max(v.tail_error / float(v) for v in vv)
        if tail_err > 1e-8:
            flags.append(f"volume tail relative error up to {tail_err:.2e}")
        vfit = _fit(eps, vols, exp.fit, flags, "volume")
        res.C, res.C_uncertainty = vfit.C, vfit.C_uncertainty
        res.L_volume, res.L_volume_uncertainty = vfit.L, vfit.L_uncertainty
        res.volume_fit = vfit
        res.samples.update({"eps": eps, "volume": vols})
    if "szego" in exp.routes:
        L, L_unc, psi, psi_unc, bu, values = szego_route(exp, table, flags)
        res.L_szego, res.L_szego_uncertainty = L, L_unc
        res.psi_hat, res.psi_hat_uncertainty, res.boundary_u = psi, psi_unc, bu
        res.samples.update({"rho": exp.rho_grid(), "szego": values})
    res.flags = flags
    return res


def log_invariant(experiments: Sequence[VolumeExperiment]) -> LReport:
    """Run every configuration and collect both routes' log coefficients."""
    return LReport([run_experiment(e) for e in experiments])
