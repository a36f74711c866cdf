"""Reproducing-kernel diagonals for balls, Reinhardt domains and disk bundles."""

from ._backend import BACKEND
from .diagonal import DiagonalValue, TruncationError, ball_reference, kernel_diagonal
from .diskbundle import (
    DiskBundleModel, ResolutionError, diskbundle_fiber, eval_y_poly, fiber_polynomial, fiber_truncated,
    fourier_mode_check, minus_rho_derivative, poly_equal,
)
from .norms import (
    DEFAULT_QUAD_TOL, NormTable, RayQuadrature, ToleranceError, cached_norms, gauss_legendre_unit,
    graded_index, monomial_norms, read_cache, write_cache,
)
from .poly import Poly2
from .profile import GeometryError, ReinhardtProfile

__all__ = [
    "BACKEND", "DiagonalValue", "DiskBundleModel", "GeometryError", "NormTable", "Poly2",
    "RayQuadrature", "ReinhardtProfile", "ResolutionError", "ToleranceError", "TruncationError",
    "DEFAULT_QUAD_TOL", "ball_reference", "cached_norms", "diskbundle_fiber", "fiber_truncated",
    "eval_y_poly", "fiber_polynomial", "fourier_mode_check", "minus_rho_derivative", "poly_equal", "gauss_legendre_unit", "graded_index", "kernel_diagonal",
    "monomial_norms", "read_cache", "write_cache",
]
