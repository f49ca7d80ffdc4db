"""Estimator facade tests.

Closed forms used:
  * weighted least squares constant fit: c = sum(w y) / sum(w)
  * best kinked-generator constant for x^2 on [-1,1] is 1/3 (solver
    suite oracle)
"""

import numpy as np
import pytest
from sklearn.base import clone, is_regressor
from sklearn.exceptions import NotFittedError

from orlipoly.estimator import OrliczPolynomialApproximator
from orlipoly.generators import OrliczFunction, make_generator


def grid_1d(n=1024):
    h = 2.0 / n
    return (-1.0 + (np.arange(n) + 0.5) * h)[:, None]


@pytest.fixture(scope="module")
def kinked():
    gen = make_generator("piecewise_linear", breakpoints=(1.0,), slopes=(1.0, 2.0))
    return OrliczFunction(gen)


def test_recovers_polynomial_data_exactly():
    X = grid_1d(512)
    y = 0.25 - X[:, 0] + 0.5 * X[:, 0] ** 2
    est = OrliczPolynomialApproximator(degree=2).fit(X, y)
    assert np.allclose(est.predict(X), y, atol=1e-9)
    assert est.score(X, y) == pytest.approx(1.0, abs=1e-12)
    assert est.coefficients_[(1,)] == pytest.approx(-1.0, abs=1e-9)
    assert est.residual_ <= est.tol * 10


def test_two_dimensional_fit():
    g = np.linspace(-1.0, 1.0, 24)
    xx, yy = np.meshgrid(g, g)
    X = np.column_stack([xx.ravel(), yy.ravel()])
    y = X[:, 0] + 2.0 * X[:, 1] + X[:, 0] * X[:, 1]
    est = OrliczPolynomialApproximator(degree=2).fit(X, y)
    assert np.allclose(est.predict(X), y, atol=1e-8)
    assert est.coefficients_[(1, 1)] == pytest.approx(1.0, abs=1e-8)
    assert est.n_features_in_ == 2


def test_weighted_fit_matches_replication():
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([0.0, 1.0, 4.0])
    w = np.array([0.25, 0.25, 0.5])
    a = OrliczPolynomialApproximator(degree=0).fit(X, y, sample_weight=w)
    X2 = np.array([[0.0], [1.0], [2.0], [2.0]])
    y2 = np.array([0.0, 1.0, 4.0, 4.0])
    b = OrliczPolynomialApproximator(degree=0).fit(X2, y2)
    assert a.coefficients_[(0,)] == pytest.approx(2.25, abs=1e-6)
    assert b.coefficients_[(0,)] == pytest.approx(2.25, abs=1e-6)


def test_kinked_constant_fit(kinked):
    X = grid_1d(1024)
    y = X[:, 0] ** 2
    est = OrliczPolynomialApproximator(orlicz=kinked, degree=0, tol=1e-5)
    est.fit(X, y)
    assert est.coefficients_[(0,)] == pytest.approx(1.0 / 3.0, abs=2e-3)


def test_truncation_path_matches_direct_solve_on_bounded_data(kinked):
    X = grid_1d(512)
    y = X[:, 0] ** 2
    direct = OrliczPolynomialApproximator(orlicz=kinked, degree=1).fit(X, y)
    trunc = OrliczPolynomialApproximator(
        orlicz=kinked, degree=1, truncation_levels=[2.0, 4.0]
    ).fit(X, y)
    got = np.array([trunc.coefficients_[a] for a in sorted(trunc.coefficients_)])
    want = np.array([direct.coefficients_[a] for a in sorted(direct.coefficients_)])
    assert np.allclose(got, want, atol=1e-6)
    assert trunc.n_iter_ == 2


def test_deterministic_given_random_state(kinked):
    X = grid_1d(256)
    y = np.abs(X[:, 0])
    a = OrliczPolynomialApproximator(orlicz=kinked, degree=1, random_state=7).fit(X, y)
    b = OrliczPolynomialApproximator(orlicz=kinked, degree=1, random_state=7).fit(X, y)
    assert np.array_equal(a.polynomial_.coeffs, b.polynomial_.coeffs)


def test_sklearn_protocol():
    est = OrliczPolynomialApproximator(degree=3, tol=1e-6)
    assert is_regressor(est)
    params = est.get_params()
    assert params["degree"] == 3 and params["tol"] == 1e-6
    est2 = clone(est)
    assert est2.get_params() == params
    assert est.set_params(degree=1) is est
    assert est.get_params()["degree"] == 1


def test_predict_before_fit_raises():
    with pytest.raises(NotFittedError):
        OrliczPolynomialApproximator().predict(np.zeros((3, 1)))


def test_validation_errors():
    X = grid_1d(16)
    y = X[:, 0]
    with pytest.raises(ValueError, match="1 or 2 columns"):
        OrliczPolynomialApproximator().fit(np.zeros((8, 3)), np.zeros(8))
    with pytest.raises(ValueError, match="one weight per row"):
        OrliczPolynomialApproximator().fit(X, y, sample_weight=np.ones(4))
    with pytest.raises(ValueError, match="positive"):
        OrliczPolynomialApproximator().fit(X, y, sample_weight=np.zeros(16))
    with pytest.raises(TypeError, match="OrliczFunction"):
        OrliczPolynomialApproximator(orlicz="square").fit(X, y)
    est = OrliczPolynomialApproximator().fit(X, y)
    with pytest.raises(ValueError, match="columns"):
        est.predict(np.zeros((4, 2)))
