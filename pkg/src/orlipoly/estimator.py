"""Estimator facade: polynomial regression under a convex modular loss.

Wraps the solver in the fit/predict idiom so the approximation operator
can sit in pipelines and grid searches next to ordinary regressors.
``X`` holds sample coordinates (1 or 2 columns), ``y`` the sampled
values; ``sample_weight`` doubles as the quadrature weight of each
point, defaulting to the uniform weighting that makes the empirical
modular a plain average.

With ``truncation_levels`` set, fitting runs the truncation scheme
instead of the direct solve, which accepts data whose modular diverges
as long as the derivative-weighted mass stays finite.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .domains import QuadDomain, SampledFunction
from .extension import extend
from .generators import OrliczFunction, make_generator
from .solver import ApproxProblem, solve


class OrliczPolynomialApproximator(RegressorMixin, BaseEstimator):
    """Best polynomial fit minimising an integral of phi(|residual|).

    Parameters
    ----------
    orlicz : OrliczFunction or None
        The convex modular; None means the squared-residual generator,
        which reduces fitting to weighted least squares.
    degree : int
        Total degree bound of the fitted polynomial.
    tol : float
        Residual tolerance of the optimality certificate, scaled by the
        data's derivative-weighted mass.
    max_iter : int
        Subgradient iteration budget before the polish phase.
    truncation_levels : sequence of float or None
        When given, fit through the truncation scheme at these clamp
        levels (ascending); needed for heavy-tailed targets.
    random_state : int
        Seed for the certification directions; fits are deterministic
        given the seed.
    """

    def __init__(
        self,
        orlicz=None,
        degree=1,
        tol=1e-4,
        max_iter=150,
        truncation_levels=None,
        random_state=0,
    ):
        self.orlicz = orlicz
        self.degree = degree
        self.tol = tol
        self.max_iter = max_iter
        self.truncation_levels = truncation_levels
        self.random_state = random_state

    def _resolved_orlicz(self):
        if self.orlicz is None:
            return OrliczFunction(make_generator("power", p=2.0))
        if not isinstance(self.orlicz, OrliczFunction):
            raise TypeError("orlicz must be an OrliczFunction or None")
        return self.orlicz

    def fit(self, X, y, sample_weight=None):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] not in (1, 2):
            raise ValueError(
                f"X must have 1 or 2 columns, got {X.shape[1]}"
            )
        if sample_weight is None:
            weights = np.full(X.shape[0], 1.0 / X.shape[0])
        else:
            weights = np.asarray(sample_weight, dtype=float)
            if weights.shape != (X.shape[0],):
                raise ValueError("sample_weight must be one weight per row of X")
            if np.any(weights <= 0):
                raise ValueError("sample_weight entries must be positive")
        F = self._resolved_orlicz()
        domain = QuadDomain.from_points(X, weights)
        f = SampledFunction(domain, np.asarray(y, dtype=float), provenance="table")
        seed = int(self.random_state)
        if self.truncation_levels is not None:
            run = extend(
                F,
                f,
                int(self.degree),
                levels=[float(v) for v in self.truncation_levels],
                tol=float(self.tol),
                seed=seed,
                solver_opts={"max_iter": int(self.max_iter)},
            )
            self.polynomial_ = run.final
            self.objective_ = run.records[-1].objective
            self.residual_ = run.extended_resid
            self.n_iter_ = len(run.records)
        else:
            prob = ApproxProblem(F, f, int(self.degree))
            res = solve(
                prob,
                tol=float(self.tol),
                max_iter=int(self.max_iter),
                seed=seed,
            )
            self.polynomial_ = res.polynomial
            self.objective_ = res.objective
            self.residual_ = res.residual_max
            self.n_iter_ = res.iterations
        self.coefficients_ = dict(
            zip(self.polynomial_.alphas, np.asarray(self.polynomial_.coeffs))
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "polynomial_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.n_features_in_}"
            )
        return self.polynomial_(X)
