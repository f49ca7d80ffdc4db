"""Catalog tests: closed forms, analytic metadata, and validation.

Hand oracles:
  * |x|^1.5 at x=1, degree 2: coefficients (1, 1.5, 0.375) from
    C(1.5, k) = (1, 1.5, 1.5*0.5/2)
  * sign(x)|x|^2 at x=0.5 equals x^2 there: (0.25, 1, 1)
  * sin(pi x) at 0, degree 3: (0, pi, 0, -pi^3/6)
  * moments on [-1,1]: |x|^g -> (2/(g+1), 0); sign(x)|x|^g -> (0,
    2/(g+2)); amp*sign -> (0, amp); |x|^g(1+d sign x) -> (2/(g+1),
    2d/(g+2)); |x|^-b -> (2/(1-b), 0); amp*sin(pi f x) -> (0,
    2 amp (sin w / w^2 - cos w / w)), w = pi f
"""

import math

import numpy as np
import pytest

from orlipoly.domains import QuadDomain, SampledFunction
from orlipoly.errors import DomainError
from orlipoly.registry import TestFunction, list_functions, make_function

ALL_NAMES = [
    "abs_pow",
    "odd_abs_pow",
    "poly",
    "poly2",
    "radial_pow",
    "sign_perturbed_pow",
    "sign_step",
    "sine",
    "sing_pow",
]


# -- point values ---------------------------------------------------------------


def test_point_values():
    assert make_function("abs_pow", gamma=1.5)(np.array([-4.0]))[0] == 8.0
    assert make_function("sing_pow", beta=0.5)(np.array([0.25]))[0] == 2.0
    f = make_function("sign_perturbed_pow", gamma=2.0, delta=0.1)
    assert f(np.array([0.5]))[0] == pytest.approx(0.275, abs=1e-15)
    assert f(np.array([-0.5]))[0] == pytest.approx(0.225, abs=1e-15)
    s = make_function("sine", freq=2.0, amp=0.5)
    assert s(np.array([0.25]))[0] == pytest.approx(0.5, abs=1e-15)
    p = make_function("poly", coeffs=(1.0, 2.0, 3.0), center=0.5)
    assert p(np.array([1.5]))[0] == pytest.approx(6.0, abs=1e-12)
    p2 = make_function("poly2")  # x + y
    assert p2(np.array([[2.0, 3.0]]))[0] == pytest.approx(5.0, abs=1e-14)
    r = make_function("radial_pow", gamma=2.0)
    assert r(np.array([[3.0, 4.0]]))[0] == pytest.approx(25.0, abs=1e-12)


# -- taylor data ------------------------------------------------------------------


def test_abs_pow_taylor_hand_values():
    tf = make_function("abs_pow", gamma=1.5)
    T = tf.taylor(1.0, 2)
    assert np.allclose(T.coeffs, [1.0, 1.5, 0.375], atol=1e-14)
    assert np.allclose(T.center, [1.0])


def test_taylor_matches_finite_differences():
    tf = make_function("abs_pow", gamma=2.5)
    T = tf.taylor(1.0, 2)
    h = 1e-5
    fp = (tf(np.array([1.0 + h]))[0] - tf(np.array([1.0 - h]))[0]) / (2 * h)
    fpp = (
        tf(np.array([1.0 + h]))[0]
        - 2 * tf(np.array([1.0]))[0]
        + tf(np.array([1.0 - h]))[0]
    ) / h**2
    assert T.coeffs[0] == tf(np.array([1.0]))[0]
    assert T.coeffs[1] == pytest.approx(fp, abs=1e-5)
    assert T.coeffs[2] == pytest.approx(fpp / 2.0, abs=1e-4)


def test_odd_abs_pow_taylor_off_origin():
    tf = make_function("odd_abs_pow", gamma=2.0)
    T = tf.taylor(0.5, 2)  # equals x^2 on the right half-line
    assert np.allclose(T.coeffs, [0.25, 1.0, 1.0], atol=1e-14)
    Tn = tf.taylor(-0.5, 2)  # equals -x^2 on the left
    assert np.allclose(Tn.coeffs, [-0.25, 1.0, -1.0], atol=1e-14)


def test_sine_taylor_at_origin():
    tf = make_function("sine")
    T = tf.taylor(0.0, 3)
    w = math.pi
    assert np.allclose(T.coeffs, [0.0, w, 0.0, -(w**3) / 6.0], atol=1e-12)


def test_poly_taylor_is_exact_recentring():
    tf = make_function("poly", coeffs=(1.0, 2.0, 3.0), center=0.0)
    T = tf.taylor(0.5, 2)
    x = np.array([0.1, 0.9, 2.0])
    assert T(x) == pytest.approx(tf(x), abs=1e-12)
    assert tf.taylor(0.5, 1).degree == 1


def test_taylor_nonexistence_cases():
    assert make_function("abs_pow", gamma=1.0).taylor(0.0, 1) is None
    assert make_function("sign_step").taylor(0.0, 1) is None
    assert make_function("sing_pow").taylor(0.0, 2) is None
    assert make_function("radial_pow", gamma=1.0).taylor(np.zeros(2), 1) is None
    # order-m smallness: gamma above the degree gives the zero polynomial
    Z = make_function("sign_perturbed_pow", gamma=2.0, delta=0.1).taylor(0.0, 1)
    assert Z is not None and np.allclose(Z.coeffs, 0.0)
    Z2 = make_function("radial_pow", gamma=1.5).taylor(np.zeros(2), 1)
    assert Z2 is not None and np.allclose(Z2.coeffs, 0.0)


def test_abs_pow_taylor_even_monomial_at_origin():
    T = make_function("abs_pow", gamma=2.0).taylor(0.0, 2)
    assert np.allclose(T.coeffs, [0.0, 0.0, 1.0], atol=0)


def test_radial_paraboloid_taylor():
    T = make_function("radial_pow", gamma=2.0).taylor(np.zeros(2), 2)
    d = T.coeff_dict()
    assert d[(2, 0)] == 1.0 and d[(0, 2)] == 1.0
    assert sum(abs(v) for v in d.values()) == 2.0


def test_sign_step_taylor_off_origin_is_constant():
    T = make_function("sign_step", amp=2.0).taylor(0.7, 1)
    assert np.allclose(T.coeffs, [2.0, 0.0], atol=0)
    assert np.allclose(T.center, [0.7])


# -- cell averages ------------------------------------------------------------------


def test_sing_pow_cell_average_matches_quadrature():
    tf = make_function("sing_pow", beta=0.75)
    lo, hi = np.array([0.5]), np.array([0.6])
    got = tf.cell_average(lo, hi)[0]
    x = np.linspace(0.5, 0.6, 200001)
    want = np.trapezoid(tf(x), x) / 0.1
    assert got == pytest.approx(want, rel=1e-9)


def test_sing_pow_cell_average_total_mass():
    tf = make_function("sing_pow", beta=0.5)
    d = QuadDomain.box(-1.0, 1.0, 1024)
    f = SampledFunction.from_callable(d, tf.fn, cell_average=tf.cell_average)
    assert f.integral() == pytest.approx(4.0, rel=1e-12)  # 2/(1-beta)


# -- moments -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name,params",
    [
        ("poly", {"coeffs": (1.0, 2.0, 3.0), "center": 0.0}),
        ("abs_pow", {"gamma": 1.5}),
        ("odd_abs_pow", {"gamma": 2.0}),
        ("sign_step", {"amp": 2.0}),
        ("sign_perturbed_pow", {"gamma": 2.0, "delta": 0.1}),
        ("sine", {"freq": 1.0, "amp": 1.0}),
        ("sing_pow", {"beta": 0.75}),
    ],
)
def test_moments_match_quadrature(name, params):
    tf = make_function(name, **params)
    assert tf.moments is not None
    d = QuadDomain.box(-1.0, 1.0, 8192)
    f = SampledFunction.from_callable(d, tf.fn, cell_average=tf.cell_average)
    x = d.points[:, 0]
    mass = f.integral()
    first = d.integrate(x * f.values)
    tol = 1e-6 if tf.cell_average is None else 1e-3
    assert mass == pytest.approx(tf.moments[0], abs=tol)
    assert first == pytest.approx(tf.moments[1], abs=tol)


def test_sine_moment_closed_form():
    # 2 (sin w / w^2 - cos w / w) at w = pi reduces to 2/pi
    tf = make_function("sine")
    assert tf.moments[1] == pytest.approx(2.0 / math.pi, abs=1e-15)


# -- catalog listing -----------------------------------------------------------------


def test_list_functions_rows():
    rows = list_functions()
    assert [r["name"] for r in rows] == ALL_NAMES
    by_name = {r["name"]: r for r in rows}
    assert by_name["sing_pow"]["has_cell_average"] is True
    assert by_name["sing_pow"]["has_taylor"] is True
    assert by_name["poly2"]["dim"] == 2
    assert by_name["radial_pow"]["dim"] == 2
    assert by_name["sine"]["defaults"] == {"freq": 1.0, "amp": 1.0}
    for r in rows:
        assert set(r) == {
            "name",
            "dim",
            "defaults",
            "membership",
            "notes",
            "has_taylor",
            "has_cell_average",
        }
        assert r["membership"]


def test_label_format():
    assert make_function("sing_pow", beta=0.75).label() == "sing_pow(beta=0.75)"
    assert make_function("sine").label() == "sine(amp=1.0,freq=1.0)"


def test_callable_protocol():
    tf = make_function("abs_pow", gamma=2.0)
    assert isinstance(tf, TestFunction)
    x = np.array([0.5, -2.0])
    assert np.array_equal(tf(x), tf.fn(x))


# -- validation ----------------------------------------------------------------------


def test_unknown_name_lists_catalog():
    with pytest.raises(DomainError, match="abs_pow"):
        make_function("nope")


def test_unknown_parameter_lists_accepted():
    with pytest.raises(DomainError, match="accepts"):
        make_function("sine", wavelength=2.0)


@pytest.mark.parametrize(
    "name,params",
    [
        ("sing_pow", {"beta": 1.0}),
        ("sing_pow", {"beta": 0.0}),
        ("sing_pow", {"beta": -0.5}),
        ("abs_pow", {"gamma": 0.0}),
        ("odd_abs_pow", {"gamma": -1.0}),
        ("sign_perturbed_pow", {"gamma": 0.0}),
        ("radial_pow", {"gamma": -2.0}),
        ("poly2", {"degree": 2, "coeffs": (1.0, 2.0)}),
    ],
)
def test_parameter_domain_rejections(name, params):
    with pytest.raises(DomainError):
        make_function(name, **params)
