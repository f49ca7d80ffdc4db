"""Extension of the best-approximation operator to merely psi_plus-integrable data.

Data f with finite int psi_plus(|f|) need not have a finite modular, so
the minimisation problem itself may be meaningless; the operator is
extended through bounded truncations.  Clamping f to [-L, L] for a
growing schedule of levels L yields ordinary solves whose solutions
stabilise; the stabilised polynomial is accepted when it satisfies the
extended optimality inequality

    int_{f>P, Q>0} psi_minus(|f-P|)|Q| + int_{f<P, Q<0} psi_minus(|f-P|)|Q|
 <= int_{f<P, Q>0} psi_plus(|f-P|)|Q| + int_{f>P, Q<0} psi_plus(|f-P|)|Q|

for every direction Q (equivalently: the one-sided derivative formula
of the solver, which stays finite for such f, is >= 0).  The accepted
polynomial also obeys the mass bound

    int phi(|P|) <= 5 * Lambda_{psi_plus} * sup|P| * int psi_plus(|f|).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ExtensionError, MembershipError
from .domains import SampledFunction
from .solver import (
    ApproxProblem,
    BoundCheck,
    characterization_residual,
    make_test_set,
    solve,
)


def default_levels():
    """Doubling truncation levels 2, 4, ..., 2**14."""
    return [float(2**k) for k in range(1, 15)]


def truncate(f: SampledFunction, level):
    """Clamp the sampled values to [-level, level].

    The clamp never increases magnitudes and is the identity wherever
    |f| <= level, so truncations are dominated by the data and converge
    to it pointwise as the level grows.
    """
    level = float(level)
    if not level > 0:
        raise DomainError("truncation level must be positive")
    return f.with_values(
        np.clip(f.values, -level, level),
        provenance=f"{f.provenance}|clamp({level:g})",
    )


def psi_plus_mass(F, f: SampledFunction):
    """int psi_plus(|f|) on the grid; raises if it is not finite."""
    vals = F.psi_plus(np.abs(f.values))
    total = float(np.dot(f.domain.weights, vals))
    if not np.isfinite(total):
        raise MembershipError("psi_plus(|f|) is not grid-integrable")
    return total


def extended_residual(F, f: SampledFunction, P, test_set=None, seed=0, degree=None):
    """Worst violation of the extended optimality inequality.

    Works for any f with finite psi_plus-mass, whether or not the
    modular of f is finite.  Zero means every tested direction accepts P.
    """
    degree = P.degree if degree is None else degree
    prob = ApproxProblem(F, f, degree, center=P.center, require_phi_mass=False)
    return characterization_residual(prob, P, test_set=test_set, seed=seed)


@dataclass
class LevelRecord:
    level: float
    polynomial: object
    coeff_delta: float
    objective: float
    residual_truncated: float
    residual_extended: float


@dataclass
class ExtensionRun:
    levels: list
    records: list
    final: object
    cauchy_level: float | None
    extended_resid: float
    tol_effective: float
    accepted: bool
    mass_bound: BoundCheck
    sup_norm_growth: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def final_coeffs(self):
        return self.final.coeffs


def extend(
    F,
    f: SampledFunction,
    degree,
    levels=None,
    cauchy_tol=1e-5,
    tol=1e-4,
    seed=0,
    center=None,
    solver_opts=None,
):
    """Run the truncation scheme and accept a stabilised polynomial.

    Levels are visited in increasing order with warm starts; the run
    stops at the first level whose solution moved less than
    ``cauchy_tol`` (max abs coefficient change) from the previous one.
    Acceptance additionally requires the extended residual of the final
    polynomial against the untruncated data to certify below tolerance.
    Exhausting the schedule without stabilising raises, with a
    diagnostic when the iterates' sup norms grew monotonically (the
    signature of data outside the operator's reach).
    """
    levels = default_levels() if levels is None else sorted(float(v) for v in levels)
    if len(levels) < 2:
        raise DomainError("need at least two truncation levels")
    solver_opts = dict(solver_opts or {})
    data_mass = psi_plus_mass(F, f)
    tol_eff = tol * (data_mass + 1.0)

    records = []
    prev = None
    cauchy_level = None
    sups = []
    resid_prob = ApproxProblem(F, f, degree, center=center, require_phi_mass=False)
    test_set = make_test_set(resid_prob, seed=seed)
    for lv in levels:
        fn = truncate(f, lv)
        prob = ApproxProblem(F, fn, degree, center=center)
        res = solve(prob, tol=tol, seed=seed, init=prev, **solver_opts)
        c = np.asarray(res.polynomial.coeffs)
        delta = float("inf") if prev is None else float(np.max(np.abs(c - prev)))
        ext_res = characterization_residual(resid_prob, c, test_set=test_set)
        records.append(
            LevelRecord(
                level=lv,
                polynomial=res.polynomial,
                coeff_delta=delta,
                objective=res.objective,
                residual_truncated=res.residual_max,
                residual_extended=ext_res,
            )
        )
        sups.append(res.polynomial.norms(f.domain)[0])
        prev = c
        if delta <= cauchy_tol:
            cauchy_level = lv
            break
    else:
        growing = all(b > a for a, b in zip(sups, sups[1:]))
        raise ExtensionError(
            "truncation levels exhausted without coefficient stabilisation"
            + (
                "; iterate sup norms grew monotonically, data is likely outside "
                "the operator's reach on this grid"
                if growing
                else ""
            ),
            trace=[r.coeff_delta for r in records],
        )

    final = records[-1].polynomial
    ext_resid = records[-1].residual_extended
    bound = extended_mass_bound(F, f, final)
    return ExtensionRun(
        levels=[r.level for r in records],
        records=records,
        final=final,
        cauchy_level=cauchy_level,
        extended_resid=ext_resid,
        tol_effective=tol_eff,
        accepted=bool(ext_resid <= tol_eff),
        mass_bound=bound,
        sup_norm_growth=all(b > a for a, b in zip(sups, sups[1:])),
        meta={"data_psi_plus_mass": data_mass, "seed": seed},
    )


def extended_mass_bound(F, f: SampledFunction, P, slack=1e-9):
    """int phi(|P|) <= 5 * Lambda_{psi_plus} * sup|P| * int psi_plus(|f|)."""
    pv = np.abs(P(f.domain.points))
    lhs = float(np.dot(f.domain.weights, F.phi(pv)))
    rhs = 5.0 * F.lambda_psi_plus * float(np.max(pv)) * psi_plus_mass(F, f)
    return BoundCheck(lhs=lhs, rhs=rhs, ok=lhs <= rhs * (1.0 + slack))


def membership_report(F, sample_at, base_cells, factor=2, flag_ratio=1.5):
    """Two-resolution integrability heuristic.

    ``sample_at(cells)`` must return a SampledFunction of the same data
    at the requested resolution.  Masses that keep growing under
    refinement (ratio above ``flag_ratio``) are flagged as likely
    divergent; a genuine member's mass is stable.
    """
    coarse = sample_at(base_cells)
    fine = sample_at(base_cells * factor)
    out = {}
    for name, g in (("phi", F.phi), ("psi_plus", F.psi_plus)):
        a = float(np.dot(coarse.domain.weights, g(np.abs(coarse.values))))
        b = float(np.dot(fine.domain.weights, g(np.abs(fine.values))))
        ratio = b / a if a > 0 else float("inf")
        out[name] = {
            "coarse": a,
            "fine": b,
            "ratio": ratio,
            "likely_member": bool(ratio <= flag_ratio),
        }
    return out


@dataclass
class ContinuityRow:
    index: int
    modular_dist: float
    poly_dist: float


def continuity_probe(
    F,
    h: SampledFunction,
    perturbations,
    envelope: SampledFunction,
    degree,
    labels=None,
    tol=1e-4,
    seed=0,
    solver_opts=None,
    **extend_opts,
):
    """Distances of perturbed solutions to the base solution.

    Requires a strictly increasing psi_plus (otherwise the limit object
    is not unique and distances are meaningless) and that every
    perturbation is dominated pointwise by the envelope.  Returns one
    row per perturbation: the psi_plus-modular of the perturbation size
    and the sup distance between the fitted polynomials.
    """
    if not F.strictly_increasing:
        raise DomainError("continuity probe requires strictly increasing psi_plus")
    psi_plus_mass(F, envelope)
    for k, hn in enumerate(perturbations):
        if np.any(np.abs(hn.values) > np.abs(envelope.values) * (1 + 1e-12) + 1e-300):
            raise DomainError(f"perturbation {k} is not dominated by the envelope")
    base = extend(
        F, h, degree, tol=tol, seed=seed, solver_opts=solver_opts, **extend_opts
    )
    base_vals = base.final(h.domain.points)
    rows = []
    for k, hn in enumerate(perturbations):
        run = extend(
            F, hn, degree, tol=tol, seed=seed, solver_opts=solver_opts, **extend_opts
        )
        dist = float(np.max(np.abs(run.final(h.domain.points) - base_vals)))
        mod = float(
            np.dot(h.domain.weights, F.psi_plus(np.abs(hn.values - h.values)))
        )
        rows.append(
            ContinuityRow(
                index=labels[k] if labels is not None else k + 1,
                modular_dist=mod,
                poly_dist=dist,
            )
        )
    return rows
