"""Log-term density on the CR three-sphere, computed exactly on polynomial fields."""

from . import conventions
from .fields import (
    MAX_DEGREE, DegreeCapError, HarmonicField, PseudohermitianData, TruncationMismatch, frame_apply,
    integrate_density, integrate_exact, mean_value, psi_density, reduced_monomials, sublaplacian,
)

__all__ = [
    "conventions", "MAX_DEGREE", "DegreeCapError", "HarmonicField", "PseudohermitianData",
    "TruncationMismatch", "frame_apply", "integrate_density", "integrate_exact", "mean_value",
    "psi_density", "reduced_monomials", "sublaplacian",
]
