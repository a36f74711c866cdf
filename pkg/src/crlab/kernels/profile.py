"""Reinhardt model domains in C^2 described through ``r_i = |z_i|^2``."""

from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
from typing import Optional

import numpy as np

from .poly import Poly2, ray_derivative, ray_eval


class GeometryError(ValueError):
    """The profile does not describe a star-shaped domain with smooth boundary."""


@dataclass(frozen=True)
class ReinhardtProfile:
    """Domain ``{p(r1, r2) > 0}`` with optional toric weight and density.

    Parameters
    ----------
    p : Poly2
        Defining polynomial, ``p(0, 0) > 0``.
    weight : Poly2, optional
        Exponent ``w`` of the defining-function rescaling ``rho = e^w p``.
    density : Poly2, optional
        Exponent ``h`` of the volume element ``dv = e^h dV``.
    """

    p: Poly2
    weight: Poly2 = field(default_factory=Poly2)
    density: Poly2 = field(default_factory=Poly2)

    def __post_init__(self):
        if self.p.coeff(0, 0) <= 0:
            raise GeometryError("the profile must be positive at the origin")
        if self.p.degree < 1:
            raise GeometryError("a constant profile bounds no domain")

    @classmethod
    def ball(cls, density: Optional[Poly2] = None, weight: Optional[Poly2] = None) -> "ReinhardtProfile":
        p = Poly2({(0, 0): 1, (1, 0): -1, (0, 1): -1})
        return cls(p, weight or Poly2(), density or Poly2())

    @classmethod
    def from_strings(cls, profile: str, weight: str = "", density: str = "") -> "ReinhardtProfile":
        from ..cli.profile import parse_polynomial

        w = parse_polynomial(weight) if weight.strip() else Poly2()
        h = parse_polynomial(density) if density.strip() else Poly2()
        return cls(parse_polynomial(profile), w, h)

    @property
    def is_ball(self) -> bool:
        return self.p == Poly2({(0, 0): 1, (1, 0): -1, (0, 1): -1})

    def rho(self, r1, r2):
        return np.exp(self.weight(r1, r2)) * self.p(r1, r2)

    def is_symmetric(self) -> bool:
        return self.p.is_symmetric() and self.weight.is_symmetric() and self.density.is_symmetric()

    def profile_hash(self) -> str:
        text = "|".join(x.canonical() for x in (self.p, self.weight, self.density))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def boundary_radius(self, u: np.ndarray) -> np.ndarray:
        """First positive zero ``R(u)`` of ``p`` along the ray ``s (u, 1-u)``."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        P = self.p.ray_coefficients(u)
        R = np.empty(u.size)
        for i in range(u.size):
            c = P[:, i]
            top = np.nonzero(c)[0].max()
            if top == 0:
                raise GeometryError(f"profile is constant along direction u={u[i]:.6g}")
            roots = np.roots(c[: top + 1][::-1])
            real = roots[(np.abs(roots.imag) <= 1e-9 * np.maximum(1, np.abs(roots))) & (roots.real > 0)].real
            if real.size == 0:
                raise GeometryError(f"domain is unbounded in direction u={u[i]:.6g}")
            R[i] = real.min()
        dP = ray_derivative(P)
        with np.errstate(divide="ignore", invalid="ignore"):  # a zero slope is reported below
            for _ in range(3):
                R = R - ray_eval(P, R) / ray_eval(dP, R)
        slope = ray_eval(dP, R)
        if np.any(~(slope < 0)) or np.any(~np.isfinite(R)):
            raise GeometryError("gradient of the profile vanishes or points outward on the boundary")
        return R

    def boundary_slope(self, u: np.ndarray, R: np.ndarray) -> np.ndarray:
        """``d/ds p(s u, s(1-u))`` at ``s = R``."""
        return ray_eval(ray_derivative(self.p.ray_coefficients(u)), R)

    def level_radius(self, u: np.ndarray, eps: float, R: Optional[np.ndarray] = None) -> np.ndarray:
        """Radius where ``e^w p = eps`` along each ray, ``0 < eps < rho(0)``."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if R is None:
            R = self.boundary_radius(u)
        if eps <= 0:
            return R.copy()
        P = self.p.ray_coefficients(u)
        W = self.weight.ray_coefficients(u)
        dP, dW = ray_derivative(P), ray_derivative(W)

        def f(s):
            return np.exp(ray_eval(W, s)) * ray_eval(P, s) - eps

        if np.any(f(np.zeros_like(R)) <= 0):
            raise GeometryError(f"level {eps} is not below the value of rho at the origin")
        lo, hi = np.zeros_like(R), R.copy()
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            pos = f(mid) > 0
            lo = np.where(pos, mid, lo)
            hi = np.where(pos, hi, mid)
        s = 0.5 * (lo + hi)
        for _ in range(2):
            ew = np.exp(ray_eval(W, s))
            df = ew * (ray_eval(dP, s) + ray_eval(dW, s) * ray_eval(P, s))
            step = f(s) / df
            s = np.where(np.isfinite(step), s - step, s)
        return s

    def check_monotone(self, u: np.ndarray, R: np.ndarray, samples: int = 65) -> None:
        """Require ``rho`` to decrease strictly along each ray inside the domain."""
        t = np.linspace(0.0, 1.0, samples)[:, None]
        s = t * R[None, :]
        P = self.p.ray_coefficients(u)
        W = self.weight.ray_coefficients(u)
        vals = np.exp(ray_eval(W, s)) * ray_eval(P, s)
        if np.any(np.diff(vals, axis=0) >= 0):
            bad = u[np.any(np.diff(vals, axis=0) >= 0, axis=0)][0]
            raise GeometryError(f"rho is not monotone along the ray u={bad:.6g}")
