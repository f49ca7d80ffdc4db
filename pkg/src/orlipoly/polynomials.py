"""Dense multivariate polynomials with explicit expansion centers.

Coefficients are stored against the graded-lexicographic list of
multi-indices of total degree <= m, always relative to a stated center,
because local fitting reads coefficients as scaled derivatives at that
center and must never lose track of it.  Evaluation builds per-axis
power tables once and combines them, so values are exact up to rounding
(no sampling or interpolation step).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .domains import QuadDomain


def multi_indices(dim, degree):
    """All exponent tuples with total degree <= degree, graded lex order."""
    if dim < 1 or degree < 0:
        raise DomainError("need dim >= 1 and degree >= 0")
    out = []
    for total in range(degree + 1):
        block = [
            alpha
            for alpha in itertools.product(range(total + 1), repeat=dim)
            if sum(alpha) == total
        ]
        out.extend(sorted(block, reverse=True))
    return out


def space_dimension(dim, degree):
    return math.comb(dim + degree, dim)


def basis_matrix(dim, degree, center, pts):
    """Matrix of monomials (x - center)^alpha, one column per multi-index."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != dim:
        raise DomainError(f"points have dimension {pts.shape[1]}, expected {dim}")
    center = np.asarray(center, dtype=float)
    d = pts - center
    # per-axis power tables, cumulative products keep evaluation direct
    pows = []
    for k in range(dim):
        tab = np.empty((pts.shape[0], degree + 1))
        tab[:, 0] = 1.0
        for j in range(1, degree + 1):
            tab[:, j] = tab[:, j - 1] * d[:, k]
        pows.append(tab)
    alphas = multi_indices(dim, degree)
    cols = [
        np.prod([pows[k][:, alpha[k]] for k in range(dim)], axis=0)
        for alpha in alphas
    ]
    return np.column_stack(cols)


@dataclass(frozen=True)
class Polynomial:
    """Polynomial sum_alpha coeffs[alpha] * (x - center)^alpha."""

    dim: int
    degree: int
    coeffs: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if coeffs.shape != (space_dimension(self.dim, self.degree),):
            raise DomainError(
                f"coefficient vector must have length "
                f"{space_dimension(self.dim, self.degree)} for dim={self.dim}, "
                f"degree={self.degree}"
            )
        if center.shape != (self.dim,):
            raise DomainError("center has wrong dimension")
        coeffs = np.ascontiguousarray(coeffs)
        coeffs.flags.writeable = False
        center = np.ascontiguousarray(center)
        center.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "center", center)

    @classmethod
    def zero(cls, dim, degree, center=None):
        center = np.zeros(dim) if center is None else center
        return cls(dim, degree, np.zeros(space_dimension(dim, degree)), center)

    @classmethod
    def from_coeff_dict(cls, mapping, dim, degree, center=None):
        center = np.zeros(dim) if center is None else center
        alphas = multi_indices(dim, degree)
        vec = np.zeros(len(alphas))
        index = {a: i for i, a in enumerate(alphas)}
        for alpha, val in mapping.items():
            alpha = tuple(int(a) for a in np.atleast_1d(alpha))
            if alpha not in index:
                raise DomainError(f"multi-index {alpha} outside degree bound {degree}")
            vec[index[alpha]] = float(val)
        return cls(dim, degree, vec, center)

    @property
    def alphas(self):
        return multi_indices(self.dim, self.degree)

    def coeff_dict(self):
        return {a: float(c) for a, c in zip(self.alphas, self.coeffs)}

    def __call__(self, pts):
        B = basis_matrix(self.dim, self.degree, self.center, pts)
        return B @ self.coeffs

    # -- algebra (same center; degrees are aligned upward) -----------------

    def with_degree(self, degree):
        if degree < self.degree:
            raise DomainError("cannot lower the degree bound")
        out = Polynomial.zero(self.dim, degree, self.center)
        vec = np.array(out.coeffs)
        index = {a: i for i, a in enumerate(out.alphas)}
        for a, c in zip(self.alphas, self.coeffs):
            vec[index[a]] = c
        return Polynomial(self.dim, degree, vec, self.center)

    def truncated(self, degree):
        """Drop coefficients above ``degree``: the Taylor polynomial of
        this polynomial at its own center."""
        if degree >= self.degree:
            return self.with_degree(degree)
        keep = multi_indices(self.dim, degree)
        index = {a: i for i, a in enumerate(self.alphas)}
        vec = np.array([self.coeffs[index[a]] for a in keep])
        return Polynomial(self.dim, degree, vec, self.center)

    def _aligned(self, other):
        if not np.array_equal(self.center, other.center):
            raise DomainError("polynomial arithmetic requires a common center")
        m = max(self.degree, other.degree)
        return self.with_degree(m), other.with_degree(m)

    def __add__(self, other):
        a, b = self._aligned(other)
        return Polynomial(a.dim, a.degree, np.asarray(a.coeffs) + b.coeffs, a.center)

    def __sub__(self, other):
        a, b = self._aligned(other)
        return Polynomial(a.dim, a.degree, np.asarray(a.coeffs) - b.coeffs, a.center)

    def __neg__(self):
        return Polynomial(self.dim, self.degree, -np.asarray(self.coeffs), self.center)

    def scaled(self, c):
        return Polynomial(self.dim, self.degree, c * np.asarray(self.coeffs), self.center)

    # -- recentering -------------------------------------------------------

    def recenter(self, new_center):
        """Exact Taylor shift of the expansion point (binomial formula)."""
        new_center = np.atleast_1d(np.asarray(new_center, dtype=float))
        if new_center.shape != (self.dim,):
            raise DomainError("new center has wrong dimension")
        m = self.degree
        tensor = np.zeros((m + 1,) * self.dim)
        for a, c in zip(self.alphas, self.coeffs):
            tensor[a] = c
        for axis in range(self.dim):
            d = new_center[axis] - self.center[axis]
            shift = np.zeros((m + 1, m + 1))
            for k in range(m + 1):
                for j in range(k + 1):
                    shift[j, k] = math.comb(k, j) * d ** (k - j)
            tensor = np.tensordot(shift, tensor, axes=([1], [axis]))
            tensor = np.moveaxis(tensor, 0, axis)
        vec = np.array([tensor[a] for a in self.alphas])
        return Polynomial(self.dim, self.degree, vec, new_center)

    # -- norms --------------------------------------------------------------

    def norms(self, domain: QuadDomain):
        """(grid sup norm, grid L1 norm) over the domain's points."""
        vals = np.abs(self(domain.points))
        return float(np.max(vals)), float(np.dot(domain.weights, vals))


def random_polynomials(dim, degree, count, rng, center=None):
    center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    D = space_dimension(dim, degree)
    for _ in range(count):
        yield Polynomial(dim, degree, rng.standard_normal(D), center)


def estimate_norm_equivalence(dim, degree, domain, trials=2000, seed=0):
    """Empirical constant M with M * sup|P| <= mean|P| on the domain.

    Returns the smallest observed ratio ||P||_1 / (|Omega| * ||P||_sup)
    over seeded random coefficient draws plus the basis directions.  The
    estimate can only decrease as ``trials`` grows (draws are consumed
    from one stream), and it is always strictly positive.
    """
    if trials < 1000:
        raise DomainError("norm equivalence estimation needs >= 1000 trials")
    rng = np.random.default_rng(seed)
    D = space_dimension(dim, degree)
    B = basis_matrix(dim, degree, np.zeros(dim), domain.points)
    best = np.inf
    candidates = itertools.chain(
        (row for row in np.eye(D)), (rng.standard_normal(D) for _ in range(trials))
    )
    for c in candidates:
        vals = np.abs(B @ c)
        sup = float(np.max(vals))
        if sup == 0.0:
            continue
        ratio = float(np.dot(domain.weights, vals)) / (domain.measure * sup)
        if ratio < best:
            best = ratio
    return float(best)


def estimate_coeff_sup_ratio(dim, degree, domain=None, trials=2000, seed=0):
    """Empirical constant C with max_alpha |b_alpha| <= C * sup|P|.

    Here b_alpha are the coefficients relative to the canonical unit
    ball (radius-1 interval in 1-D), so the constant depends only on
    (dim, degree) and transfers to any ball by coefficient scaling.
    Chebyshev-style candidates are included: they are the classical
    extremisers of coefficient growth at fixed sup norm.
    """
    if domain is None:
        domain = (
            QuadDomain.box(-1.0, 1.0, 2048)
            if dim == 1
            else QuadDomain.ball(np.zeros(2), 1.0, 128)
        )
    rng = np.random.default_rng(seed)
    D = space_dimension(dim, degree)
    B = basis_matrix(dim, degree, np.zeros(dim), domain.points)
    worst = 0.0

    def cheb_coeffs(k):
        c = np.zeros(k + 1)
        c[k] = 1.0
        return np.polynomial.chebyshev.cheb2poly(c)

    structured = []
    if dim == 1:
        for k in range(degree + 1):
            vec = np.zeros(D)
            vec[: k + 1] = cheb_coeffs(k)
            structured.append(vec)
    else:
        alphas = multi_indices(dim, degree)
        for i, alpha in enumerate(alphas):
            # tensor products of Chebyshev factors per axis
            vec = np.zeros(D)
            cx = cheb_coeffs(alpha[0])
            cy = cheb_coeffs(alpha[1])
            for j, beta in enumerate(alphas):
                if beta[0] < len(cx) and beta[1] < len(cy):
                    vec[j] = cx[beta[0]] * cy[beta[1]]
            structured.append(vec)
    candidates = itertools.chain(
        (row for row in np.eye(D)),
        structured,
        (rng.standard_normal(D) for _ in range(trials)),
    )
    for c in candidates:
        vals = np.abs(B @ c)
        sup = float(np.max(vals))
        if sup == 0.0:
            continue
        worst = max(worst, float(np.max(np.abs(c))) / sup)
    return float(worst)
