import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from crlab.exact import QI, Scalar
from crlab.microexpand import (
    MicroExpansion, PreconditionError, SmoothSeries, differentiate, divide_by_parameter,
    integrate as mx_integrate, laplace_from_symbol, multiply_parameter, multiply_smooth,
    phi, phi_eval, standard_section,
)

T = sp.symbols("t", positive=True)


def phi_sym(j):
    if j >= 0:
        return sp.factorial(j) * T ** (-j - 1)
    return sp.Integer(-1) ** j / sp.factorial(-j - 1) * T ** (-j - 1) * sp.log(T)


def smooth_part(expr):
    """Polynomial-in-t part of an expression a(t) + b(t) log t (b, a Laurent)."""
    expr = sp.expand(expr)
    no_log = expr.subs(sp.log(T), 0)
    poly = sp.Poly(sp.expand(no_log * T**40), T)
    return sum(c * T ** (m[0] - 40) for m, c in zip(poly.monoms(), poly.coeffs()) if m[0] >= 40)


SAMPLES = np.linspace(0.02, 0.98, 50)


@pytest.mark.parametrize("j,t,expected", [(0, 2.0, 0.5), (2, 1.0, 2.0), (-2, math.e, math.e)])
def test_phi_eval_examples(j, t, expected):
    assert phi_eval(j, t) == pytest.approx(expected, rel=1e-15)


def test_phi_eval_domain():
    with pytest.raises(ValueError):
        phi_eval(0, 0.0)
    with pytest.raises(ValueError):
        phi_eval(-1, -1.0)


def test_phi_minus_one_is_minus_log():
    assert phi_eval(-1, 3.0) == pytest.approx(-math.log(3.0))


def test_standard_sections():
    delta = standard_section("delta")
    heav = standard_section("heaviside")
    assert delta.evaluate(1.0) == pytest.approx(1j / (2 * math.pi))
    assert heav.evaluate(1.0) == 0
    assert heav.evaluate(math.e) == pytest.approx(1 / (-2j * math.pi))
    assert delta.order == 0 and heav.order == -1
    assert delta.terms[0] == Scalar(QI(0, Fraction(1, 2)), -1)


def test_differentiate_heaviside_is_delta():
    assert differentiate(standard_section("heaviside")) == standard_section("delta")


@pytest.mark.parametrize("j,expected", [(1, phi(2, -1)), (-2, phi(-1, -1))])
def test_differentiate_examples(j, expected):
    assert differentiate(phi(j)) == expected


@pytest.mark.parametrize("j", range(-6, 6))
def test_differentiate_rule_against_sympy(j):
    lhs = sp.diff(phi_sym(j), T)
    rhs = -phi_sym(j + 1)
    remainder = sp.simplify(lhs - rhs)
    # the discrepancy is a polynomial in t, i.e. smooth
    assert sp.simplify(remainder - smooth_part(lhs - rhs)) == 0
    ours = differentiate(phi(j))
    f = sp.lambdify(T, lhs - remainder)
    for t in SAMPLES:
        assert ours.evaluate(t).real == pytest.approx(float(f(t)), rel=1e-12)


@pytest.mark.parametrize("j", range(-6, 6))
@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_multiply_by_power_rule(j, m):
    lhs = sp.expand(T**m * phi_sym(j))
    remainder = smooth_part(lhs)
    ours = multiply_smooth(phi(j), SmoothSeries.monomial(m))
    fall = math.prod(j - i for i in range(m))
    expected = phi(j - m, fall) if fall else MicroExpansion({})
    assert ours == expected
    f = sp.lambdify(T, lhs - remainder)
    for t in SAMPLES:
        want = float(f(t))
        got = ours.evaluate(t).real
        assert got == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_multiply_smooth_examples():
    t = SmoothSeries.monomial(1)
    assert multiply_smooth(phi(1), t) == phi(0)
    assert multiply_smooth(phi(0), t) == MicroExpansion({})
    one_plus_t = SmoothSeries([1, 1])
    assert multiply_smooth(phi(-1), one_plus_t) == phi(-1) + phi(-2, -1)


def test_multiply_smooth_truncates_to_lower_bound():
    u = phi(-3, 1, lower=-4)
    out = multiply_smooth(u, SmoothSeries([0, 0, 1]))
    assert out == MicroExpansion({})
    assert out.lower == -4


def test_divide_by_parameter_examples():
    eps = SmoothSeries([0, 1])
    eps2 = SmoothSeries([0, 0, 1])
    u = MicroExpansion({0: eps, -1: eps2})
    v = divide_by_parameter(u)
    assert v == MicroExpansion({0: SmoothSeries([1]), -1: SmoothSeries([0, 1])})
    assert divide_by_parameter(MicroExpansion({})) == MicroExpansion({})
    with pytest.raises(PreconditionError):
        divide_by_parameter(MicroExpansion({0: SmoothSeries([1, 1])}))


series_st = st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=5)


@given(st.dictionaries(st.integers(-8, 4), series_st, max_size=5))
@settings(max_examples=60, deadline=None)
def test_divide_is_left_inverse_of_parameter_multiplication(raw):
    terms = {j: SmoothSeries([QI(a, b) for a, b in cs]) for j, cs in raw.items()}
    u = MicroExpansion(terms)
    assert divide_by_parameter(multiply_parameter(u)) == u


@given(st.dictionaries(st.integers(-10, 6), st.tuples(st.integers(-9, 9), st.integers(-9, 9)),
                       max_size=6))
@settings(max_examples=80, deadline=None)
def test_order_and_nondegeneracy_after_ring_ops(raw):
    u = MicroExpansion({j: QI(a, b) for j, (a, b) in raw.items()})
    for w in (u, differentiate(u), u + phi(7), multiply_smooth(u, SmoothSeries([1, 2]))):
        nonzero = [j for j, c in w.terms.items() if c]
        assert w.order == (max(nonzero) if nonzero else None)
        assert w.nondegenerate == bool(nonzero)


def test_integrate_inverts_differentiate():
    u = phi(2, 3) + phi(-3, QI(1, 1))
    assert differentiate(mx_integrate(u)) == u


def test_laplace_examples():
    u = laplace_from_symbol({1: 1, 0: 1})
    assert u == phi(1) + phi(0)
    for rho in (0.3, 1.0, 2.5):
        assert u.evaluate(rho).real == pytest.approx(rho**-2 + rho**-1, rel=1e-15)
    assert laplace_from_symbol({0: 1}) == phi(0)


@pytest.mark.parametrize("rho", [0.01, 0.05, 0.2, 0.6, 1.0])
def test_laplace_matches_quadrature(rho):
    a = {3: Fraction(1, 7), 2: -2, 1: Fraction(3, 2), 0: 5}
    u = laplace_from_symbol(a)
    val, _ = integrate.quad(lambda t: math.exp(-t * rho) * sum(float(c) * t**j for j, c in a.items()),
                            0, np.inf, epsabs=0, epsrel=1e-12, limit=400)
    assert u.evaluate(rho).real == pytest.approx(val, rel=1e-10)


def test_laplace_negative_power_is_log_mod_bounded():
    # int_1^inf e^{-t rho} t^{-1} dt = E1(rho) = -log(rho) - gamma + O(rho)
    u = laplace_from_symbol({-1: 1})
    diffs = []
    for rho in (1e-2, 1e-4, 1e-6):
        quad, _ = integrate.quad(lambda t: math.exp(-t * rho) / t, 1, np.inf, limit=500)
        assert quad == pytest.approx(special.exp1(rho), rel=1e-8)
        diffs.append(quad - u.evaluate(rho).real)
    assert all(abs(d + np.euler_gamma) < 2e-2 for d in diffs)
    assert abs(diffs[-1] + np.euler_gamma) < 1e-5


def test_json_roundtrip():
    u = standard_section("heaviside") + phi(3, Fraction(2, 3))
    v = MicroExpansion.from_json(u.to_json())
    assert v == u
    assert u.to_json()["order"] == 3
