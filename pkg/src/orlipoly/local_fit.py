"""Local polynomial fitting on shrinking balls and pointwise convergence.

Fit the best polynomial (in the extended modular sense) to f on balls
B(x, eps) centered at the point of interest, and watch the coefficients
as eps -> 0.  For data that is pointwise smooth of order m at x in the
averaged sense

    (1/|B|) int_B psi_plus(|f - P_x|)  =  o(psi_plus(eps^m)),

the fitted coefficients converge to the scaled derivatives of f at x.
This module provides the per-ball fit, the smoothness ratio that
operationalises the o(.) above, coefficient bounds with empirically
estimated equivalence constants, and the sup/average sandwich that
makes those constants meaningful:

    (C1 / Lambda_phi) psi_plus(C1 sup|P|)
        <= (1/|B|) int_B psi_plus(|P|) <= psi_plus(sup|P|).

All constants (C1, the coefficient/sup ratio C, and the bound factor
K = 5 Lambda_{psi_plus} Lambda_phi / C1) are estimated once per space
shape and reported, never hard-coded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .domains import QuadDomain, SampledFunction
from .polynomials import (
    Polynomial,
    estimate_coeff_sup_ratio,
    estimate_norm_equivalence,
    multi_indices,
    random_polynomials,
)
from .extension import extend
from .solver import BoundCheck

DEFAULT_BALL_CELLS = 2048


def default_eps_schedule():
    return [2.0**-k for k in range(1, 11)]


@dataclass
class LocalProblem:
    """A function, a point, a degree bound, and an optional reference.

    ``fn`` maps coordinate arrays to values; ``cell_average`` (optional,
    1-D) maps cell edges to exact means for singular data.  The
    reference polynomial, when present, must be centered at x: its
    coefficients are the scaled derivatives the fits should recover.
    """

    orlicz: object
    fn: object
    x: np.ndarray
    degree: int
    reference: Polynomial | None = None
    cell_average: object = None
    ball_cells: int = DEFAULT_BALL_CELLS
    name: str = "anonymous"

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if self.reference is not None and not np.allclose(
            self.reference.center, self.x
        ):
            raise DomainError("reference polynomial must be centered at x")

    @property
    def dim(self):
        return self.x.size

    def ball(self, eps):
        return QuadDomain.ball(self.x, float(eps), self.ball_cells)

    def sample(self, eps):
        return SampledFunction.from_callable(
            self.ball(eps), self.fn, name=self.name, cell_average=self.cell_average
        )


def local_fit(lp: LocalProblem, eps, tol=1e-4, seed=0, levels=None, **extend_opts):
    """Extended best fit on B(x, eps), expanded around x."""
    run = extend(
        lp.orlicz,
        lp.sample(eps),
        lp.degree,
        levels=levels,
        tol=tol,
        seed=seed,
        center=lp.x,
        **extend_opts,
    )
    if not run.accepted:
        raise DomainError(
            f"local fit at eps={eps} not accepted "
            f"(residual {run.extended_resid:.3e} > {run.tol_effective:.3e})"
        )
    return run.final


def smoothness_ratio(lp: LocalProblem, eps):
    """Averaged psi_plus-distance to the reference, normalised by
    psi_plus(eps^m).  Decay to zero as eps -> 0 is the operational
    meaning of pointwise smoothness of order m at x."""
    if lp.reference is None:
        raise DomainError("smoothness ratio needs a reference polynomial")
    f = lp.sample(eps)
    dom = f.domain
    dist = np.abs(f.values - lp.reference(dom.points))
    avg = dom.average(lp.orlicz.psi_plus(dist))
    return float(avg / lp.orlicz.psi_plus(float(eps) ** lp.degree))


@dataclass(frozen=True)
class LocalConstants:
    """Empirical equivalence constants for one space shape (dim, degree)."""

    dim: int
    degree: int
    c1: float  # mean/sup norm equivalence on the unit ball
    coeff_sup: float  # max scaled coefficient / sup norm, unit ball
    c: float  # coeff_sup / c1: scaled-coefficient bound constant
    k: float  # 5 * Lambda_{psi_plus} * Lambda_phi / c1

    def as_dict(self):
        return {
            "dim": self.dim,
            "degree": self.degree,
            "C1": self.c1,
            "coeff_sup": self.coeff_sup,
            "C": self.c,
            "K": self.k,
        }


def estimate_local_constants(F, dim, degree, trials=4000, seed=2024):
    unit = (
        QuadDomain.box(-1.0, 1.0, 2048)
        if dim == 1
        else QuadDomain.ball(np.zeros(2), 1.0, 128)
    )
    c1 = estimate_norm_equivalence(dim, degree, unit, trials=trials, seed=seed)
    coeff_sup = estimate_coeff_sup_ratio(dim, degree, unit, trials=trials, seed=seed)
    return LocalConstants(
        dim=dim,
        degree=degree,
        c1=c1,
        coeff_sup=coeff_sup,
        c=coeff_sup / c1,
        k=5.0 * F.lambda_psi_plus * F.lambda_phi / c1,
    )


def sandwich_records(F, ball: QuadDomain, degree, c1, n_polys=100, seed=0, slack=1e-9):
    """Check the sup/average sandwich for seeded random polynomials.

    Returns one (lhs, mid, rhs, ok) record per polynomial, where
    lhs = (C1/Lambda_phi) psi_plus(C1 sup|P|), mid is the ball average
    of psi_plus(|P|), and rhs = psi_plus(sup|P|).
    """
    center = np.asarray(ball.params["center"], dtype=float)
    rng = np.random.default_rng(seed)
    rows = []
    for P in random_polynomials(ball.dim, degree, n_polys, rng, center=center):
        vals = np.abs(P(ball.points))
        sup = float(np.max(vals))
        if sup == 0.0:
            continue
        lhs = (c1 / F.lambda_phi) * float(F.psi_plus(c1 * sup))
        mid = float(ball.average(F.psi_plus(vals)))
        rhs = float(F.psi_plus(sup))
        rows.append(
            {
                "lhs": lhs,
                "mid": mid,
                "rhs": rhs,
                "ok": bool(
                    lhs <= mid * (1 + slack) and mid <= rhs * (1 + slack)
                ),
            }
        )
    return rows


def local_sup_bound(F, lp: LocalProblem, eps, P, constants: LocalConstants, slack=1e-9):
    """psi_plus(C1 sup|P|) <= (K / |B|) int_B psi_plus(|f|)."""
    f = lp.sample(eps)
    dom = f.domain
    sup = float(np.max(np.abs(P(dom.points))))
    lhs = float(F.psi_plus(constants.c1 * sup))
    rhs = constants.k * dom.average(F.psi_plus(np.abs(f.values)))
    return BoundCheck(lhs=lhs, rhs=rhs, ok=lhs <= rhs * (1.0 + slack))


def coefficient_bound_check(
    F, lp: LocalProblem, eps, P, constants: LocalConstants, slack=1e-9
):
    """Per-coefficient bound ratios; every ratio must be <= 1.

    ratio_alpha = psi_plus(eps^|alpha| |a_alpha| / C) * |B|
                  / (K * int_B psi_plus(|f|)).
    """
    f = lp.sample(eps)
    dom = f.domain
    data = constants.k * dom.average(F.psi_plus(np.abs(f.values)))
    out = {}
    for alpha, a in zip(P.alphas, P.coeffs):
        arg = float(eps) ** sum(alpha) * abs(float(a)) / constants.c
        num = float(F.psi_plus(arg))
        if num == 0.0:
            ratio = 0.0  # zero data fits zero polynomials: 0/0 counts as held
        elif data > 0.0:
            ratio = num / data
        else:
            ratio = float("inf")
        out[alpha] = {"ratio": ratio, "ok": bool(ratio <= 1.0 + slack)}
    return out


@dataclass
class LocalFitTrace:
    eps_schedule: list
    rows: list  # per eps: dict with coeffs, errors, rho, bound ratios
    slopes: dict  # per alpha: fitted log-log slope of the error (or None)
    final_errors: dict
    constants: LocalConstants
    meta: dict = field(default_factory=dict)


def convergence_experiment(
    lp: LocalProblem,
    eps_schedule=None,
    tol=1e-4,
    seed=0,
    constants=None,
    error_floor=1e-10,
    **fit_opts,
):
    """Fit along a shrinking eps schedule and measure coefficient decay.

    Needs a reference polynomial (the analytically known scaled
    derivatives at x) and a strictly increasing psi_plus; errors below
    ``error_floor`` count as converged and are excluded from slope fits.
    """
    if lp.reference is None:
        raise DomainError("convergence experiment needs a reference polynomial")
    if not lp.orlicz.strictly_increasing:
        raise DomainError("convergence experiment requires strictly increasing psi_plus")
    eps_schedule = (
        default_eps_schedule() if eps_schedule is None else [float(e) for e in eps_schedule]
    )
    if len(eps_schedule) < 4:
        raise DomainError("need at least four schedule points")
    if constants is None:
        constants = estimate_local_constants(lp.orlicz, lp.dim, lp.degree)

    alphas = multi_indices(lp.dim, lp.degree)
    ref = dict(zip(lp.reference.alphas, lp.reference.coeffs))
    rows = []
    for eps in eps_schedule:
        P = local_fit(lp, eps, tol=tol, seed=seed, **fit_opts)
        errors = {
            alpha: abs(float(a) - float(ref.get(alpha, 0.0)))
            for alpha, a in zip(P.alphas, P.coeffs)
        }
        rows.append(
            {
                "eps": eps,
                "coeffs": dict(zip(P.alphas, (float(v) for v in P.coeffs))),
                "errors": errors,
                "rho": smoothness_ratio(lp, eps),
                "bound": coefficient_bound_check(
                    lp.orlicz, lp, eps, P, constants
                ),
            }
        )

    slopes = {}
    final_errors = {}
    for alpha in alphas:
        errs = np.array([row["errors"][alpha] for row in rows])
        final_errors[alpha] = float(errs[-1])
        live = errs > error_floor
        if np.count_nonzero(live) >= 2:
            x = np.log(np.asarray(eps_schedule)[live])
            y = np.log(errs[live])
            slopes[alpha] = float(np.polyfit(x, y, 1)[0])
        else:
            slopes[alpha] = None  # error sits at the floor: already converged
    return LocalFitTrace(
        eps_schedule=eps_schedule,
        rows=rows,
        slopes=slopes,
        final_errors=final_errors,
        constants=constants,
        meta={"name": lp.name, "x": lp.x.tolist(), "degree": lp.degree},
    )


def smoothness_decay_ok(trace: LocalFitTrace, factor=1.2, final_fraction=0.05, tail=4):
    """Operational o(.) test for the smoothness ratio along the schedule:
    the last ``tail`` halvings must each shrink rho by ``factor``, and
    the final rho must be below ``final_fraction`` of the first."""
    rho = [row["rho"] for row in trace.rows]
    if len(rho) < tail + 1:
        raise DomainError("schedule too short for the decay test")
    steps_ok = all(
        rho[i + 1] * factor <= rho[i] + 1e-300 for i in range(len(rho) - tail - 1, len(rho) - 1)
    )
    return bool(steps_ok and rho[-1] <= final_fraction * rho[0])


def reference_uniqueness_probe(lp: LocalProblem, P1, P2, eps_schedule=None):
    """Floor of the separation diagnostic between two candidate references.

    For Q = P1 - P2 != 0 the quantity (1/|B|) int_B psi_plus(|Q|) /
    psi_plus(eps^m) stays bounded away from zero as eps -> 0; a strictly
    positive floor over the schedule witnesses that both candidates
    cannot simultaneously be order-m references for the same data.
    """
    eps_schedule = (
        default_eps_schedule() if eps_schedule is None else [float(e) for e in eps_schedule]
    )
    Q = P1 - P2
    if float(np.max(np.abs(np.asarray(Q.coeffs)))) == 0.0:
        zeros = [0.0] * len(eps_schedule)
        return 0.0, zeros  # identical candidates separate by nothing
    vals = []
    for eps in eps_schedule:
        dom = lp.ball(eps)
        qv = np.abs(Q(dom.points))
        vals.append(
            float(dom.average(lp.orlicz.psi_plus(qv)))
            / float(lp.orlicz.psi_plus(float(eps) ** lp.degree))
        )
    return float(np.min(vals)), vals
