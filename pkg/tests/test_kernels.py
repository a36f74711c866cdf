import logging
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from crlab.kernels import (
    DiskBundleModel, GeometryError, Poly2, ReinhardtProfile, ResolutionError, ToleranceError,
    TruncationError, ball_reference, cached_norms, diskbundle_fiber, fiber_polynomial, fiber_truncated,
    fourier_mode_check, gauss_legendre_unit, graded_index, kernel_diagonal, minus_rho_derivative,
    monomial_norms, poly_equal, read_cache, write_cache,
)
from crlab.kernels import _pycore
from crlab.kernels.norms import cache_path, format_log, parse_log
from crlab.microexpand import laplace_from_symbol, singular_coefficients

from conftest import perturbed

PI2 = math.pi**2


def sphere_log_norm(a1, a2):
    # |z^a|^2 over S^3 is 2 pi^2 a! / (|a|+1)!, and the boundary measure is dS / 2
    k = a1 + a2
    return math.log(PI2) - math.log((k + 1) * math.comb(k, a1))


# ---- quadrature ----

@pytest.mark.parametrize("n", [5, 64, 500])
def test_gauss_legendre_exact_on_beta_integrals(n):
    u, v, w = gauss_legendre_unit(n)
    assert np.allclose(u + v, 1.0, rtol=0, atol=1e-16)
    for k in range(0, 2 * n - 1, max(1, n // 3)):
        for a in (0, k // 2, k):
            lt = np.log(w) + a * np.log(u) + (k - a) * np.log(v)
            m = lt.max()
            val = m + math.log(math.fsum(np.exp(lt - m)))
            assert val == pytest.approx(-math.log((k + 1) * math.comb(k, a)), abs=1e-12 + 1e-15 * k)


# ---- norms ----

def test_ball_norm_examples(ball_table):
    assert ball_table.boundary_norm(0, 0) == pytest.approx(PI2, rel=1e-12)
    assert ball_table.boundary_norm(1, 0) == pytest.approx(PI2 / 2, rel=1e-12)
    assert ball_table.domain_norm(0, 0) == pytest.approx(PI2 / 2, rel=1e-12)


def test_ball_norms_match_beta_oracle(ball_table):
    for k in range(0, 401, 23):
        for a1 in range(0, k + 1, max(1, k // 7)):
            ref = sphere_log_norm(a1, k - a1)
            assert ball_table.log_norm("szego", a1, k - a1) == pytest.approx(ref, abs=1e-11)
            assert ball_table.log_norm("bergman", a1, k - a1) == pytest.approx(ref - math.log(k + 2), abs=1e-11)


def test_perturbed_norms_against_scipy_quad(perturbed_table):
    prof = perturbed_table.profile

    def R(u):
        return prof.boundary_radius(np.array([u]))[0]

    for a1, a2 in [(0, 0), (3, 1), (10, 20)]:
        k = a1 + a2

        def fb(u):
            r = R(u)
            return u**a1 * (1 - u) ** a2 * r ** (k + 1) / -prof.boundary_slope(np.array([u]), np.array([r]))[0]

        def fd(u):
            return u**a1 * (1 - u) ** a2 * R(u) ** (k + 2) / (k + 2)

        b = PI2 * integrate.quad(fb, 0, 1, epsabs=0, epsrel=1e-12, limit=200)[0]
        d = PI2 * integrate.quad(fd, 0, 1, epsabs=0, epsrel=1e-12, limit=200)[0]
        assert perturbed_table.boundary_norm(a1, a2) == pytest.approx(b, rel=1e-9)
        assert perturbed_table.domain_norm(a1, a2) == pytest.approx(d, rel=1e-9)


def test_density_and_weight_enter_norms():
    h = Poly2({(1, 0): Fraction(3, 10)})
    t = monomial_norms(ReinhardtProfile.ball(density=h), 6)

    def fd(s, u):
        return s * math.exp(0.3 * s * u)

    d = PI2 * integrate.dblquad(fd, 0, 1, 0, 1, epsabs=0, epsrel=1e-12)[0]
    assert t.domain_norm(0, 0) == pytest.approx(d, rel=1e-10)
    # boundary: e^(h - w) / |d_s p| with rho = e^w p
    w = Poly2({(0, 1): Fraction(1, 5)})
    tw = monomial_norms(ReinhardtProfile.ball(weight=w), 6)
    b = PI2 * integrate.quad(lambda u: math.exp(-0.2 * (1 - u)), 0, 1)[0]
    assert tw.boundary_norm(0, 0) == pytest.approx(b, rel=1e-12)
    assert tw.domain_norm(0, 0) == pytest.approx(PI2 / 2, rel=1e-12)


def test_symmetric_profile_gives_symmetric_norms(perturbed_table):
    assert perturbed_table.profile.is_symmetric()
    for k in range(0, 301, 17):
        for a1 in range(k + 1):
            for kind in ("szego", "bergman"):
                x = perturbed_table.log_norm(kind, a1, k - a1)
                y = perturbed_table.log_norm(kind, k - a1, a1)
                assert x == y


def test_norms_positive_finite(perturbed_table):
    assert np.all(np.isfinite(perturbed_table.log_boundary))
    assert np.all(np.isfinite(perturbed_table.log_domain))


def test_tolerance_error_when_nodes_capped():
    with pytest.raises(ToleranceError):
        monomial_norms(perturbed("0.1"), 200, quad_tol=1e-14, n_nodes=40, max_nodes=40)


@pytest.mark.parametrize("p", [
    Poly2({(0, 0): 1, (1, 0): -1}),                                  # unbounded in r2
    Poly2({(0, 0): 1, (1, 0): -2, (0, 1): -2, (2, 0): 1, (0, 2): 1, (1, 1): 2}),  # (1 - r1 - r2)^2
])
def test_geometry_errors(p):
    with pytest.raises(GeometryError):
        monomial_norms(ReinhardtProfile(p), 4)


def test_profile_must_be_positive_at_origin():
    with pytest.raises(GeometryError):
        ReinhardtProfile(Poly2({(0, 0): -1, (1, 0): 1}))


def test_profile_hash_ignores_spelling():
    a = ReinhardtProfile(Poly2({(0, 0): 1, (1, 0): -1, (0, 1): -1}))
    b = ReinhardtProfile(Poly2({(0, 1): "-1.0", (0, 0): "1", (1, 0): Fraction(-2, 2)}))
    assert a.profile_hash() == b.profile_hash()
    assert a.profile_hash() != ReinhardtProfile.ball(density=Poly2({(1, 0): 1})).profile_hash()


# ---- cache ----

def test_cache_cold_warm_identical(tmp_path):
    prof = perturbed("0.05")
    cold = cached_norms(prof, 40, cache_dir=tmp_path)
    assert cache_path(tmp_path, prof, 40, cold.quad_tol).exists()
    warm = cached_norms(prof, 40, cache_dir=tmp_path)
    assert np.array_equal(cold.log_boundary, warm.log_boundary)
    assert np.array_equal(cold.log_domain, warm.log_domain)
    assert warm.n_nodes == cold.n_nodes
    a = kernel_diagonal(cold, "szego", (0.1, 0.2), tol=None)
    b = kernel_diagonal(warm, "szego", (0.1, 0.2), tol=None)
    assert float(a) == float(b)


def test_cache_file_format(tmp_path, ball_table):
    small = ball_table.truncated(5)
    path = tmp_path / "n.csv"
    write_cache(path, small)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# profile_hash=")
    assert lines[4] == "alpha1,alpha2,norm_boundary,norm_domain"
    assert len(lines) == 5 + 21
    a1, a2, nb, nd = lines[5].split(",")
    assert (a1, a2) == ("0", "0") and float(nb) == pytest.approx(PI2, rel=1e-15)
    back = read_cache(path, small.profile)
    assert np.array_equal(back.log_boundary, small.log_boundary)


def test_corrupt_cache_is_rebuilt(tmp_path, caplog):
    prof = perturbed("0.05")
    good = cached_norms(prof, 10, cache_dir=tmp_path)
    path = cache_path(tmp_path, prof, 10, good.quad_tol)
    path.write_text(path.read_text()[:200])
    with caplog.at_level(logging.WARNING):
        again = cached_norms(prof, 10, cache_dir=tmp_path)
    assert "corrupt" in caplog.text
    assert np.array_equal(again.log_boundary, good.log_boundary)


@pytest.mark.parametrize("L", [-2000.123456789, -1e-3, 0.0, 5.5, 800.25])
def test_norms_outside_double_range_survive_text_format(L):
    text = format_log(L)
    assert parse_log(text) == pytest.approx(L, abs=1e-12 * max(1.0, abs(L)))
    assert format_log(parse_log(text)) is not None


# ---- compiled core vs numpy ----

@settings(max_examples=20, deadline=None)
@given(st.integers(0, 40), st.integers(1, 30), st.integers(0, 2**31))
def test_backends_agree(K, n, seed):
    from crlab.kernels import _backend

    rng = np.random.default_rng(seed)
    u = np.sort(rng.uniform(0.01, 0.99, n))
    C = rng.normal(size=(K + 1, n)) * 5
    a = _backend.log_moments(np.log(u), np.log1p(-u), C)
    b = _pycore.log_moments(np.log(u), np.log1p(-u), C)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-11)
    pts = rng.uniform(0, 0.5, size=(4, 2))
    pts[0, 1] = 0.0
    pts[1] = 0.0
    with np.errstate(divide="ignore"):
        lr = np.log(pts)
    x = _backend.diagonal_log_sums(np.ascontiguousarray(lr[:, 0]), np.ascontiguousarray(lr[:, 1]), a, K)
    y = _pycore.diagonal_log_sums(lr[:, 0], lr[:, 1], a, K)
    fin = np.isfinite(y)
    assert np.array_equal(fin, np.isfinite(x))
    np.testing.assert_allclose(x[fin], y[fin], rtol=0, atol=1e-11)


# ---- diagonals ----

@pytest.mark.parametrize("kind,point,expected", [
    ("szego", (0.0, 0.0), 1 / PI2),
    ("bergman", (0.0, 0.0), 2 / PI2),
    ("szego", (0.25, 0.25), 4 / PI2),
    ("szego", (0.5, 0.0), 4 / PI2),
])
def test_ball_diagonal_examples(ball_table, kind, point, expected):
    assert float(kernel_diagonal(ball_table, kind, point)) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("args,expected", [
    ((2, "bergman", 1.0), 2 / PI2), ((2, "szego", 0.25), 16 / PI2), ((2, "szego", 1.0), 1 / PI2),
    ((1, "szego", 0.5), 2 / math.pi), ((3, "bergman", 0.5), 6 / math.pi**3 * 16),
])
def test_ball_reference(args, expected):
    assert ball_reference(*args) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("rho", [0.0, -0.1, 1.5])
def test_ball_reference_range(rho):
    with pytest.raises(ValueError):
        ball_reference(2, "szego", rho)


def test_ball_regression_twenty_points(ball_table):
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = rng.uniform(0, 0.9)
        u = rng.uniform()
        pt = (s * u, s * (1 - u))
        for kind in ("szego", "bergman"):
            v = kernel_diagonal(ball_table, kind, pt, tol=1e-10)
            assert v.tail_bound < 1e-10 * float(v)
            assert float(v) == pytest.approx(ball_reference(2, kind, 1 - s), rel=1e-8)


def test_ball_tail_correction_exact_near_boundary(ball_table):
    v = kernel_diagonal(ball_table, "szego", (0.49, 0.5), tol=1e-12, tail_correction=True)
    assert v.bound_kind == "sandwich"
    assert float(v) == pytest.approx(ball_reference(2, "szego", 0.01), rel=1e-10)


def test_truncation_error_carries_bound(ball_table):
    with pytest.raises(TruncationError) as err:
        kernel_diagonal(ball_table, "szego", (0.45, 0.45), M_cut=50)
    assert err.value.bound > 1e-10


def test_point_outside_rejected(ball_table):
    with pytest.raises(GeometryError):
        kernel_diagonal(ball_table, "szego", (0.6, 0.5))
    with pytest.raises(ValueError):
        kernel_diagonal(ball_table, "szego", (0.1, 0.1), M_cut=401)


def test_perturbed_diagonal_against_direct_sum(perturbed_table):
    # summation order and log-space arithmetic against a plain float loop
    pt = (0.2, 0.3)
    M = 120
    direct = 0.0
    for k in range(M + 1):
        for a1 in range(k + 1):
            direct += pt[0] ** a1 * pt[1] ** (k - a1) / perturbed_table.domain_norm(a1, k - a1)
    v = kernel_diagonal(perturbed_table, "bergman", pt, M_cut=M, tol=None)
    assert v.partial == pytest.approx(direct, rel=1e-12)


def test_perturbed_tail_bound_is_valid(perturbed_table):
    pt = (0.3, 0.35)
    full = kernel_diagonal(perturbed_table, "szego", pt, tol=None)
    cut = kernel_diagonal(perturbed_table, "szego", pt, M_cut=80, tol=None)
    assert full.partial - cut.partial <= cut.tail_bound
    assert cut.tail_lower <= full.partial - cut.partial + 1e-12
    corr = kernel_diagonal(perturbed_table, "szego", pt, M_cut=150, tol=None, tail_correction=True)
    assert abs(float(corr) - float(full)) <= 10 * corr.tail_bound + 1e-12 * float(full)


def test_symmetric_diagonal(perturbed_table):
    for kind in ("szego", "bergman"):
        a = kernel_diagonal(perturbed_table, kind, (0.15, 0.4), tol=None)
        b = kernel_diagonal(perturbed_table, kind, (0.4, 0.15), tol=None)
        assert float(a) == pytest.approx(float(b), rel=1e-12)


@pytest.mark.parametrize("u", [0.0, 0.3, 0.5, 1.0])
def test_monotone_along_rays(perturbed_table, u):
    R = perturbed_table.profile.boundary_radius(np.array([u]))[0]
    for kind in ("szego", "bergman"):
        vals = [float(kernel_diagonal(perturbed_table, kind, (t * R * u, t * R * (1 - u)), tol=1e-9))
                for t in np.linspace(0, 0.8, 9)]
        assert np.all(np.diff(vals) > 0)


# ---- disk bundles ----

def test_diskbundle_examples():
    x = math.exp(-0.3)
    assert diskbundle_fiber(DiskBundleModel(2, [1, 1]), "szego", 0.3) == pytest.approx(1 / (1 - x) ** 2, rel=1e-14)
    assert diskbundle_fiber(DiskBundleModel(1, [1]), "bergman", 0.3) == pytest.approx(x / (1 - x) ** 2, rel=1e-14)


@pytest.mark.parametrize("coeffs", [[1], [1, 1], [1, "3/2", "1/2"], [2, 0, 3], ["1/6", "1", "5/2", "1"]])
def test_diskbundle_identities(coeffs):
    model = DiskBundleModel(len(coeffs), coeffs)
    S, B, Cat = (fiber_polynomial(model, k) for k in ("szego", "bergman", "catlin"))
    assert poly_equal(minus_rho_derivative(S), B)
    assert poly_equal([a + b for a, b in zip(S + [0] * 3, B + [0] * 3)], Cat)
    for rho in (1.0, 2.0, 4.0):
        h = 1e-3
        f = lambda r: diskbundle_fiber(model, "szego", r)
        num = -(f(rho - 2 * h) - 8 * f(rho - h) + 8 * f(rho + h) - f(rho + 2 * h)) / (12 * h)
        assert num == pytest.approx(diskbundle_fiber(model, "bergman", rho), rel=1e-8)
        for kind in ("szego", "bergman", "catlin"):
            assert diskbundle_fiber(model, kind, rho) == pytest.approx(fiber_truncated(model, kind, rho, 4000), rel=1e-12)


def test_diskbundle_model_validation():
    with pytest.raises(ValueError):
        DiskBundleModel(2, [1])
    with pytest.raises(ValueError):
        DiskBundleModel(2, [-5, 1])  # P(1) < 0
    with pytest.raises(ValueError):
        diskbundle_fiber(DiskBundleModel(1, [1]), "szego", 0.0)
    assert DiskBundleModel.from_string("1, 1/2").coeffs == (1, Fraction(1, 2))


def test_fourier_examples():
    m = DiskBundleModel(2, [1, 1])
    assert fourier_mode_check(m, 3, 0.0)[0] == pytest.approx(4, abs=1e-12)
    assert fourier_mode_check(m, 10, 0.1)[0] == pytest.approx(11 * math.exp(-1), rel=1e-12)
    mode, lap = fourier_mode_check(m, 25, 0.0)
    assert abs(mode - lap) < 1e-9


@pytest.mark.parametrize("coeffs", [[1], [1, 1], [1, "3/2", "1/2"]])
def test_fourier_modes_are_section_counts(coeffs):
    model = DiskBundleModel(len(coeffs), coeffs)
    for m in range(51):
        mode, _ = fourier_mode_check(model, m, 0.0)
        assert abs(mode - float(model.P(m))) <= 1e-9 * max(1.0, float(model.P(m)))


def test_fourier_resolution_errors():
    model = DiskBundleModel(2, [1, 1])
    with pytest.raises(ResolutionError):
        fourier_mode_check(model, 10, 0.0, samples=20)
    with pytest.raises(ResolutionError):
        fourier_mode_check(model, 2, 0.0, samples=12, terms=40)
    mode, _ = fourier_mode_check(model, 2, 5.0, samples=12, terms=40)
    assert mode == pytest.approx(3 * math.exp(-10), rel=1e-9)


@pytest.mark.parametrize("coeffs", [[1], [1, 1], [1, "3/2", "1/2"], [3, 0, 1]])
def test_laplace_symbol_matches_microexpansion(coeffs):
    model = DiskBundleModel(len(coeffs), coeffs)
    a = model.laplace_symbol()
    # the singular part of sum P(m) e^{-m rho} is the Laplace transform of P itself
    assert a == list(model.coeffs)
    u = laplace_from_symbol({j: c for j, c in enumerate(a)})
    sing = singular_coefficients(u)

    def remainder(rho):
        pole = sum(c.real * rho ** (-p) for p, c in sing.items())
        return diskbundle_fiber(model, "szego", rho) - pole

    # what is left after removing the poles is smooth at rho = 0
    assert abs(remainder(1e-3) - remainder(2e-3)) < 1e-2
