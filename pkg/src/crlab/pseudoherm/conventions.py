"""Pinned conventions for the round CR three-sphere.

Every sign and normalization used by :mod:`crlab.pseudoherm` is fixed here.

Sphere and functions
    ``S^3 = {|z1|^2 + |z2|^2 = 1}`` in ``C^2``. Functions are polynomials in
    ``z1, z2, z1bar, z2bar`` restricted to the sphere, stored on the reduced
    monomials ``z1^a1 z2^a2 z1bar^b1 z2bar^b2`` with ``min(a2, b2) = 0``
    (``z2 z2bar`` is rewritten as ``1 - z1 z1bar``). These monomials are a
    basis of the restricted polynomial ring, and the total degree
    ``a1 + a2 + b1 + b2`` is the truncation degree.

Frame
    ``Z1    = z2bar d/dz1 - z1bar d/dz2``
    ``Z1bar = z2 d/dz1bar - z1 d/dz2bar``
    ``T     = i (z1 d/dz1 + z2 d/dz2 - z1bar d/dz1bar - z2bar d/dz2bar)``

    All three annihilate ``|z|^2``, so they act on the sphere. ``T``
    generates the Hopf circle action ``z -> e^(i t) z`` and multiplies a
    monomial of holomorphic degree ``p`` and antiholomorphic degree ``q`` by
    ``i (p - q)``.

Structure constants
    ``[Z1, Z1bar] = -i T``, ``[T, Z1] = -2i Z1``, ``[T, Z1bar] = 2i Z1bar``.

Contact form
    ``theta = (1/2i) sum_j (zbar_j dz_j - z_j dzbar_j)`` with ``theta(T) = 1``
    and ``d theta = i h theta^1 ^ theta^1bar`` where ``theta^1(Z1) = 1`` and
    ``h = 1``. On the sphere ``theta ^ d theta = 2 dV``, so
    ``Vol(S^3, theta ^ d theta) = 4 pi^2``.

Sub-Laplacian
    ``Delta_b f = -(Z1 Z1bar + Z1bar Z1) f``, a nonnegative operator. The
    coordinate functions ``z1, z2, z1bar, z2bar`` have eigenvalue 1.

Torsion term
    ``A`` is the ``theta^1 (x) theta^1`` torsion coefficient ``A_11``. With
    ``h = 1`` raised indices become barred, so
    ``A_11,^11 = A_11,1bar1bar``. Writing ``c = omega_1^1(Z1bar)`` for the
    connection coefficient along ``Z1bar`` and using
    ``omega_1bar^1bar = -omega_1^1`` (unitary frame),

        ``B = A_11,1bar = Z1bar A - 2 c A``
        ``A_11,1bar1bar = Z1bar B - 2 c B + c B = Z1bar B - c B``.

Density
    ``psi = (Delta_b R - 2 Im A_11,^11) / (24 pi^2)``, integrated against
    ``theta ^ d theta``.
"""

from fractions import Fraction

from ..exact import Scalar

#: Vol(S^3, theta ^ d theta) = 4 pi^2
VOLUME = Scalar(4, 2)

#: theta ^ d theta = 2 dV on the unit sphere
THETA_DTHETA_PER_DV = 2

#: prefactor of the log-term density, 1 / (24 pi^2)
PSI_PREFACTOR = Scalar(Fraction(1, 24), -2)

#: sign s in Delta_b = s (Z1 Z1bar + Z1bar Z1)
SUBLAPLACIAN_SIGN = -1

#: [X, Y] = coefficient * W, written as (X, Y) -> (coefficient (re, im), W)
STRUCTURE_CONSTANTS = {
    ("Z1", "Z1bar"): ((0, -1), "T"),
    ("T", "Z1"): ((0, -2), "Z1"),
    ("T", "Z1bar"): ((0, 2), "Z1bar"),
}

DIRECTIONS = ("T", "Z1", "Z1bar")
