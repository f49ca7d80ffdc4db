"""Generator functions and their integrated convex companions.

A generator psi is a non-decreasing map on [0, oo) with psi(0) = 0,
psi > 0 on (0, oo), and psi(s) -> oo.  Its running integral

    phi(s) = integral_0^s psi(r) dr

is convex with phi(0) = 0; wherever psi jumps, phi has distinct left and
right derivatives (psi_minus, psi_plus), and best-approximation
machinery built on phi must see both sides.  This module provides the
concrete generator families used throughout the package (powers,
piecewise linear, piecewise power, tabulated samples), exact one-sided
derivative evaluation, doubling-constant estimation, and grid
verification of the structural inequalities every admissible pair
(phi, psi) satisfies:

    * psi_minus <= psi_plus, and psi_plus(s) <= psi_minus(r) for s < r,
    * (s/2) psi_plus(s/2) <= phi(s) <= s psi_plus(s) <= phi(2s),
    * (psi_plus(s) + psi_plus(r))/2 <= psi_plus(s+r)
                                    <= Lambda (psi_plus(s) + psi_plus(r)).

All evaluation is vectorised over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RangeError

DEFAULT_EVAL_RANGE = (1e-6, 1e6)
DEFAULT_GRID_POINTS = 513


def _as_nonneg_array(s, cap):
    s = np.asarray(s, dtype=float)
    if s.size and float(np.min(s)) < 0.0:
        raise DomainError(f"generator argument must be >= 0, got {float(np.min(s))}")
    if s.size and float(np.max(s)) > cap:
        raise RangeError(
            f"generator argument {float(np.max(s))} beyond working range cap {cap}"
        )
    return s


@dataclass(frozen=True)
class PowerGenerator:
    """psi(s) = p * s**(p-1) for p > 1, so phi(s) = s**p."""

    p: float

    def __post_init__(self):
        if not self.p > 1.0:
            raise DomainError(f"power generator needs p > 1, got {self.p}")

    def phi(self, s):
        return s**self.p

    def psi_left(self, s):
        return self.p * s ** (self.p - 1.0)

    psi_right = psi_left

    @property
    def strictly_increasing(self):
        return True

    def describe(self):
        return f"power(p={self.p})"


@dataclass(frozen=True)
class PiecewiseLinearGenerator:
    """psi(s) = slopes[i] * s on the i-th segment.

    Segments are [0, b_0), [b_0, b_1), ..., [b_last, oo) for ascending
    positive breakpoints b_k, so there is one more slope than breakpoints.
    At a breakpoint psi stores the right-continuous value; the one-sided
    derivatives of phi come from the adjacent segment slopes.
    """

    breakpoints: tuple
    slopes: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        sl = np.asarray(self.slopes, dtype=float)
        if sl.size != bp.size + 1:
            raise DomainError("need exactly one more slope than breakpoints")
        if bp.size and (np.any(bp <= 0) or np.any(np.diff(bp) <= 0)):
            raise DomainError("breakpoints must be positive and ascending")
        if np.any(sl <= 0):
            raise DomainError("slopes must be positive")
        if np.any(np.diff(sl) < 0):
            # a downward slope jump makes psi decrease at the breakpoint
            raise DomainError("slopes must be non-decreasing for psi to be monotone")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in bp))
        object.__setattr__(self, "slopes", tuple(float(m) for m in sl))
        # cumulative phi at the breakpoints, exact piecewise antiderivative
        edges = np.concatenate(([0.0], bp))
        seg = sl[: bp.size] * (bp**2 - edges[:-1] ** 2) / 2.0 if bp.size else np.empty(0)
        object.__setattr__(self, "_phi_at_bp", tuple(np.cumsum(seg)))

    def _segment(self, s, side):
        return np.searchsorted(np.asarray(self.breakpoints), s, side=side)

    def phi(self, s):
        bp = np.asarray(self.breakpoints)
        sl = np.asarray(self.slopes)
        cum = np.concatenate(([0.0], np.asarray(self._phi_at_bp)))
        idx = self._segment(s, "right")
        left_edge = np.where(idx > 0, bp[np.maximum(idx - 1, 0)], 0.0)
        return cum[idx] + sl[idx] * (s**2 - left_edge**2) / 2.0

    def psi_left(self, s):
        sl = np.asarray(self.slopes)
        return sl[self._segment(s, "left")] * s

    def psi_right(self, s):
        sl = np.asarray(self.slopes)
        return sl[self._segment(s, "right")] * s

    @property
    def strictly_increasing(self):
        return True  # positive slopes and upward jumps only

    def describe(self):
        return f"piecewise_linear(breakpoints={list(self.breakpoints)}, slopes={list(self.slopes)})"


@dataclass(frozen=True)
class PiecewisePowerGenerator:
    """psi(s) = coeffs[i] * s**exponents[i] on the i-th segment."""

    breakpoints: tuple
    coeffs: tuple
    exponents: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        cf = np.asarray(self.coeffs, dtype=float)
        ex = np.asarray(self.exponents, dtype=float)
        if cf.size != bp.size + 1 or ex.size != cf.size:
            raise DomainError("need one more (coeff, exponent) pair than breakpoints")
        if bp.size and (np.any(bp <= 0) or np.any(np.diff(bp) <= 0)):
            raise DomainError("breakpoints must be positive and ascending")
        if np.any(cf <= 0) or np.any(ex < 0) or ex[0] <= 0:
            raise DomainError(
                "coefficients must be positive, exponents >= 0, first exponent > 0"
            )
        # monotonicity across the seams
        for k, b in enumerate(bp):
            if cf[k + 1] * b ** ex[k + 1] < cf[k] * b ** ex[k] * (1 - 1e-12):
                raise DomainError(f"psi decreases across breakpoint {b}")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in bp))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in cf))
        object.__setattr__(self, "exponents", tuple(float(e) for e in ex))
        edges = np.concatenate(([0.0], bp))
        seg = [
            cf[i] * (bp[i] ** (ex[i] + 1) - edges[i] ** (ex[i] + 1)) / (ex[i] + 1)
            for i in range(bp.size)
        ]
        object.__setattr__(self, "_phi_at_bp", tuple(np.cumsum(seg)) if seg else ())

    def _segment(self, s, side):
        return np.searchsorted(np.asarray(self.breakpoints), s, side=side)

    def phi(self, s):
        bp = np.asarray(self.breakpoints)
        cf = np.asarray(self.coeffs)
        ex = np.asarray(self.exponents)
        cum = np.concatenate(([0.0], np.asarray(self._phi_at_bp)))
        idx = self._segment(s, "right")
        left_edge = np.where(idx > 0, bp[np.maximum(idx - 1, 0)], 0.0)
        e = ex[idx]
        return cum[idx] + cf[idx] * (s ** (e + 1) - left_edge ** (e + 1)) / (e + 1)

    def _psi(self, s, side):
        cf = np.asarray(self.coeffs)
        ex = np.asarray(self.exponents)
        idx = self._segment(s, side)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = cf[idx] * s ** ex[idx]
        return np.where(np.asarray(s) == 0.0, 0.0, out)

    def psi_left(self, s):
        return self._psi(s, "left")

    def psi_right(self, s):
        return self._psi(s, "right")

    @property
    def strictly_increasing(self):
        # a zero exponent gives a flat (constant) segment
        return all(e > 0 for e in self.exponents)

    def describe(self):
        return (
            f"piecewise_power(breakpoints={list(self.breakpoints)}, "
            f"coeffs={list(self.coeffs)}, exponents={list(self.exponents)})"
        )


@dataclass(frozen=True)
class TableGenerator:
    """psi given by monotone samples, linearly interpolated.

    phi is the exact integral of the interpolant (cumulative trapezoid),
    so the pair (phi, psi) stays consistent to rounding.  Evaluation
    beyond the last sample raises; the working range of any function
    built on a table is clipped to the table support.
    """

    s: tuple
    psi: tuple

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        p = np.asarray(self.psi, dtype=float)
        if s.size != p.size or s.size < 2:
            raise DomainError("table needs matching s/psi arrays with >= 2 samples")
        if s[0] != 0.0 or p[0] != 0.0:
            raise DomainError("table must start at (0, 0)")
        if np.any(np.diff(s) <= 0):
            raise DomainError("table abscissae must be strictly ascending")
        if np.any(np.diff(p) < 0) or np.any(p[1:] <= 0):
            raise DomainError("table psi values must be non-decreasing and > 0 off 0")
        object.__setattr__(self, "s", tuple(float(v) for v in s))
        object.__setattr__(self, "psi", tuple(float(v) for v in p))
        cum = np.concatenate(
            ([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(s)))
        )
        object.__setattr__(self, "_phi_at_knots", tuple(cum))

    @property
    def support_max(self):
        return self.s[-1]

    def _interp(self, x):
        return np.interp(x, np.asarray(self.s), np.asarray(self.psi))

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if x.size and float(np.max(x)) > self.s[-1] * (1 + 1e-12):
            raise RangeError(
                f"table generator evaluated at {float(np.max(x))}, support ends at {self.s[-1]}"
            )
        s = np.asarray(self.s)
        cum = np.asarray(self._phi_at_knots)
        idx = np.clip(np.searchsorted(s, x, side="right") - 1, 0, s.size - 2)
        x0 = s[idx]
        return cum[idx] + 0.5 * (np.asarray(self.psi)[idx] + self._interp(x)) * (x - x0)

    def psi_left(self, x):
        return self._interp(x)

    psi_right = psi_left

    @property
    def strictly_increasing(self):
        return bool(np.all(np.diff(np.asarray(self.psi)) > 0))

    def describe(self):
        return f"table({len(self.s)} samples on [0, {self.s[-1]}])"


GENERATOR_KINDS = {
    "power": PowerGenerator,
    "piecewise_linear": PiecewiseLinearGenerator,
    "piecewise_power": PiecewisePowerGenerator,
    "table": TableGenerator,
}


def make_generator(kind, **params):
    """Build a generator from its registry name and numeric parameters."""
    try:
        cls = GENERATOR_KINDS[kind]
    except KeyError:
        raise DomainError(
            f"unknown generator kind {kind!r}; known: {sorted(GENERATOR_KINDS)}"
        ) from None
    return cls(**params)


def log_grid(lo, hi, n=DEFAULT_GRID_POINTS):
    if not (0 < lo < hi):
        raise DomainError("grid needs 0 < lo < hi")
    return np.geomspace(lo, hi, n)


class OrliczFunction:
    """A convex phi with one-sided derivatives, plus its working constants.

    Wraps a generator with a declared evaluation range, estimates (or
    accepts) the doubling constants for phi, psi_minus and psi_plus, and
    validates on a log grid that the generator really is admissible:
    psi(0) = 0, psi > 0 off zero, non-decreasing, and still growing at
    the top of the range.

    phi / psi_minus / psi_plus accept any s in [0, 2 * range_hi]; the
    headroom factor 2 exists because doubling ratios and sum bounds need
    arguments up to twice the grid.
    """

    def __init__(
        self,
        generator,
        eval_range=DEFAULT_EVAL_RANGE,
        grid_points=DEFAULT_GRID_POINTS,
        lambda_phi=None,
        lambda_psi_minus=None,
        lambda_psi_plus=None,
    ):
        self.generator = generator
        lo, hi = float(eval_range[0]), float(eval_range[1])
        support = getattr(generator, "support_max", None)
        if support is not None:
            hi = min(hi, support / 2.0)
        if not (0 < lo < hi):
            raise DomainError(f"empty evaluation range ({lo}, {hi})")
        self.eval_range = (lo, hi)
        self._cap = 2.0 * hi * (1 + 1e-12)
        self.grid = log_grid(lo, hi, grid_points)
        self._check_admissible()
        self.lambda_phi = (
            float(lambda_phi) if lambda_phi is not None else estimate_delta2(self, "phi")
        )
        self.lambda_psi_minus = (
            float(lambda_psi_minus)
            if lambda_psi_minus is not None
            else estimate_delta2(self, "psi_minus")
        )
        self.lambda_psi_plus = (
            float(lambda_psi_plus)
            if lambda_psi_plus is not None
            else estimate_delta2(self, "psi_plus")
        )
        for name in ("lambda_phi", "lambda_psi_minus", "lambda_psi_plus"):
            if not np.isfinite(getattr(self, name)) or getattr(self, name) <= 0:
                raise DomainError(f"{name} must be finite and positive")

    # -- evaluation ------------------------------------------------------

    def phi(self, s):
        return self.generator.phi(_as_nonneg_array(s, self._cap))

    def psi_minus(self, s):
        return self.generator.psi_left(_as_nonneg_array(s, self._cap))

    def psi_plus(self, s):
        return self.generator.psi_right(_as_nonneg_array(s, self._cap))

    @property
    def strictly_increasing(self):
        return self.generator.strictly_increasing

    def describe(self):
        return self.generator.describe()

    # -- admissibility ---------------------------------------------------

    def _check_admissible(self):
        g = self.grid
        psi = self.generator.psi_right(g)
        if float(self.generator.psi_right(np.zeros(1))[0]) != 0.0:
            raise DomainError("psi(0) must be 0")
        if np.any(psi <= 0):
            k = int(np.argmax(psi <= 0))
            raise DomainError(f"psi must be positive on (0, oo); psi({g[k]}) = {psi[k]}")
        if np.any(np.diff(psi) < -1e-12 * psi[-1]):
            raise DomainError("psi must be non-decreasing on the working range")
        # divergence proxy: still climbing over the last octave of the range
        if not self.generator.psi_right(np.array([g[-1]]))[0] > self.generator.psi_right(
            np.array([g[-1] / 2.0])
        )[0]:
            raise DomainError("psi must keep growing at the top of the working range")


def estimate_delta2(F, which="psi_plus", s_grid=None):
    """Largest observed doubling ratio g(2s)/g(s) over a log grid.

    The grid must span at least four decades so the estimate sees both
    the small- and large-argument regimes.  Monotone under refinement:
    adding grid points can only increase the maximum.
    """
    g = {"phi": F.phi, "psi_minus": F.psi_minus, "psi_plus": F.psi_plus}[which]
    s = F.grid if s_grid is None else np.asarray(s_grid, dtype=float)
    if s.size < 2 or math.log10(float(np.max(s)) / float(np.min(s))) < 4.0:
        raise DomainError("doubling estimation grid must span >= 4 decades")
    lo = g(s)
    if np.any(lo == 0.0):
        k = int(np.argmax(lo == 0.0))
        raise DomainError(f"{which}({s[k]}) = 0 on the estimation grid")
    return float(np.max(g(2.0 * s) / lo))


def ratio_bounds(F, eta, x_grid=None):
    """Empirical envelope (g1, g2) of psi_plus(eta*x)/psi_plus(x) on a grid.

    g1 > 0 whenever the doubling constant is finite; the pair bounds how
    much a multiplicative dilation of the argument can move psi_plus.
    """
    if eta <= 0:
        raise DomainError(f"dilation factor must be positive, got {eta}")
    x = F.grid if x_grid is None else np.asarray(x_grid, dtype=float)
    cap = F.eval_range[1] * 2.0
    x = x[(x > 0) & (x * eta <= cap) & (x <= cap)]
    if x.size == 0:
        raise DomainError("no grid points admissible for this dilation factor")
    denom = F.psi_plus(x)
    if np.any(denom == 0.0):
        raise DomainError("psi_plus vanishes on the ratio grid")
    r = F.psi_plus(eta * x) / denom
    return float(np.min(r)), float(np.max(r))


@dataclass
class StructureReport:
    """Worst relative violations of the structural inequalities on a grid.

    Violations are max(0, lhs - rhs) / max(1, |rhs|); a clean generator
    reports only rounding-level numbers.
    """

    sided_order: float  # psi_minus <= psi_plus
    sided_doubling: float  # psi_plus <= Lambda_{psi_minus} * psi_minus
    separation: float  # psi_plus(s) <= psi_minus(r) for s < r
    phi_lower: float  # (s/2) psi_plus(s/2) <= phi(s)
    phi_upper: float  # phi(s) <= s psi_plus(s)
    phi_doubled: float  # s psi_plus(s) <= phi(2s)
    sum_lower: float  # (psi_plus(s)+psi_plus(r))/2 <= psi_plus(s+r)
    sum_upper: float  # psi_plus(s+r) <= Lambda_{psi_plus}(psi_plus(s)+psi_plus(r))
    details: dict = field(default_factory=dict)

    def max_violation(self):
        return max(
            self.sided_order,
            self.sided_doubling,
            self.separation,
            self.phi_lower,
            self.phi_upper,
            self.phi_doubled,
            self.sum_lower,
            self.sum_upper,
        )

    def ok(self, tol):
        return self.max_violation() <= tol


def _viol(lhs, rhs):
    v = (lhs - rhs) / np.maximum(1.0, np.abs(rhs))
    return float(max(0.0, np.max(v)))


def verify_structure(F, s_grid=None, pair_points=129):
    """Check the structural inequalities for (phi, psi_minus, psi_plus).

    One-dimensional inequalities run on the full grid; the two-argument
    sum bound runs on a coarser outer grid capped so s + r stays inside
    the evaluation headroom.
    """
    s = F.grid if s_grid is None else np.asarray(s_grid, dtype=float)
    pm, pp, ph = F.psi_minus(s), F.psi_plus(s), F.phi(s)

    rep = StructureReport(
        sided_order=_viol(pm, pp),
        sided_doubling=_viol(pp, F.lambda_psi_minus * pm),
        # consecutive pairs suffice: psi_minus is non-decreasing
        separation=_viol(pp[:-1], pm[1:]),
        phi_lower=_viol((s / 2.0) * F.psi_plus(s / 2.0), ph),
        phi_upper=_viol(ph, s * pp),
        phi_doubled=_viol(s * pp, F.phi(2.0 * s)),
        sum_lower=0.0,
        sum_upper=0.0,
    )
    # two-argument grid; cap so s + r <= 2 * range_hi
    hi = F.eval_range[1]
    t = np.geomspace(F.eval_range[0], hi, pair_points)
    a = t[:, None]
    b = t[None, :]
    ps = F.psi_plus(t)
    sum_ps = F.psi_plus(a + b)
    rep.sum_lower = _viol(0.5 * (ps[:, None] + ps[None, :]), sum_ps)
    rep.sum_upper = _viol(sum_ps, F.lambda_psi_plus * (ps[:, None] + ps[None, :]))
    rep.details = {"grid_points": int(s.size), "pair_points": int(pair_points)}
    return rep
