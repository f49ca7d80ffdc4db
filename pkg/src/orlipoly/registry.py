"""Catalog of closed-form test functions with analytic metadata.

Every entry carries the data a verification run needs and the code
under test must never compute for itself: exact scaled derivatives
(Taylor coefficients) where they exist, exact cell averages for
integrable singularities, and membership notes describing which
modulars are finite.  Numerical differentiation is deliberately absent;
if an entry cannot state a derivative analytically it states none.

Entries are factories: ``make_function("abs_pow", gamma=1.5)`` builds a
TestFunction with the parameters baked in.  ``list_functions()``
enumerates the catalog with defaults, for the command line and for
config validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .polynomials import Polynomial, space_dimension

# Registry of factories: name -> (builder, defaults, dim, membership, notes)
_CATALOG = {}


@dataclass(frozen=True)
class TestFunction:
    """A closed form plus the analytic facts tests may rely on.

    fn            : coordinate array -> values (flat in 1-D, (N,2) in 2-D)
    cell_average  : optional (lo, hi) -> exact cell means (1-D only)
    taylor        : optional (x, degree) -> Polynomial of scaled
                    derivatives centered at x, or None where f has no
                    degree-``degree`` Taylor polynomial at x
    membership    : which modulars are finite, as a human-readable note
    moments       : analytic (integral of f, integral of x*f) on [-1,1]
                    when finite and known, else None
    """

    __test__ = False  # keep pytest from collecting despite the Test prefix

    name: str
    dim: int
    params: dict
    fn: object
    cell_average: object = None
    taylor: object = None
    membership: str = ""
    moments: tuple | None = None

    def __call__(self, x):
        return self.fn(x)

    def label(self):
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})"


def _register(name, dim, defaults, membership, notes=""):
    def deco(builder):
        _CATALOG[name] = {
            "builder": builder,
            "dim": dim,
            "defaults": defaults,
            "membership": membership,
            "notes": notes,
        }
        return builder

    return deco


def make_function(name, **params):
    if name not in _CATALOG:
        known = ", ".join(sorted(_CATALOG))
        raise DomainError(f"unknown test function {name!r}; known: {known}")
    entry = _CATALOG[name]
    merged = dict(entry["defaults"])
    unknown = set(params) - set(merged)
    if unknown:
        raise DomainError(
            f"{name}: unknown parameter(s) {sorted(unknown)}; "
            f"accepts {sorted(merged)}"
        )
    merged.update(params)
    return entry["builder"](**merged)


def list_functions():
    """Catalog rows for display and config validation."""
    rows = []
    for name in sorted(_CATALOG):
        entry = _CATALOG[name]
        probe = entry["builder"](**entry["defaults"])
        rows.append(
            {
                "name": name,
                "dim": entry["dim"],
                "defaults": dict(entry["defaults"]),
                "membership": entry["membership"],
                "notes": entry["notes"],
                "has_taylor": probe.taylor is not None,
                "has_cell_average": probe.cell_average is not None,
            }
        )
    return rows


# -- 1-D entries ----------------------------------------------------------


def _poly_taylor(P):
    def taylor(x, degree):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return P.recenter(x).truncated(degree)

    return taylor


@_register(
    "poly",
    dim=1,
    defaults={"coeffs": (0.0, 1.0), "center": 0.0},
    membership="in every L^phi: bounded on bounded domains",
    notes="coeffs are ascending powers of (x - center)",
)
def _make_poly(coeffs, center):
    coeffs = tuple(float(c) for c in np.atleast_1d(coeffs))
    P = Polynomial(
        dim=1,
        degree=len(coeffs) - 1,
        coeffs=np.asarray(coeffs),
        center=np.atleast_1d(float(center)),
    )

    def moments():
        # closed forms on [-1,1] for ascending-power coefficients at 0
        if float(center) != 0.0:
            return None
        mass = sum(
            c * (1.0 - (-1.0) ** (k + 1)) / (k + 1) for k, c in enumerate(coeffs)
        )
        first = sum(
            c * (1.0 - (-1.0) ** (k + 2)) / (k + 2) for k, c in enumerate(coeffs)
        )
        return (mass, first)

    return TestFunction(
        name="poly",
        dim=1,
        params={"coeffs": coeffs, "center": float(center)},
        fn=lambda x: P(np.atleast_1d(np.asarray(x, dtype=float))[:, None]),
        taylor=_poly_taylor(P),
        membership=_CATALOG["poly"]["membership"],
        moments=moments(),
    )


def _binomial(gamma, k):
    out = 1.0
    for j in range(k):
        out *= (gamma - j) / (j + 1)
    return out


def _abs_pow_taylor(gamma, odd):
    """Scaled derivatives of |x|^gamma (odd=False) or sign(x)|x|^gamma.

    Away from the origin both are smooth with coefficients
    C(gamma,k) |x|^{gamma-k} sign(x)^k (times sign(x) in the odd case).
    At the origin the Taylor polynomial of degree m exists iff gamma > m
    (then it is zero) or f is itself a monomial of degree <= m.
    """

    def taylor(x, degree):
        x0 = float(np.atleast_1d(x)[0])
        if x0 != 0.0:
            s = math.copysign(1.0, x0)
            base = [
                _binomial(gamma, k) * abs(x0) ** (gamma - k) * s**k
                for k in range(degree + 1)
            ]
            if odd:
                base = [s * b for b in base]
            return Polynomial(1, degree, np.asarray(base), np.atleast_1d(x0))
        if gamma > degree:
            return Polynomial.zero(1, degree, center=np.zeros(1))
        g = int(round(gamma))
        is_monomial = gamma == g and (
            (odd and g % 2 == 1) or (not odd and g % 2 == 0)
        )
        if is_monomial and g <= degree:
            c = np.zeros(degree + 1)
            c[g] = 1.0
            return Polynomial(1, degree, c, np.zeros(1))
        return None

    return taylor


@_register(
    "abs_pow",
    dim=1,
    defaults={"gamma": 1.0},
    membership="gamma > 0: in every L^phi on bounded domains",
    notes="|x|^gamma; gamma=1 has no degree-1 Taylor polynomial at 0",
)
def _make_abs_pow(gamma):
    gamma = float(gamma)
    if gamma <= 0:
        raise DomainError("abs_pow needs gamma > 0 (see sing_pow for gamma < 0)")

    def mom():
        mass = 2.0 / (gamma + 1.0)
        return (mass, 0.0)

    return TestFunction(
        name="abs_pow",
        dim=1,
        params={"gamma": gamma},
        fn=lambda x: np.abs(np.asarray(x, dtype=float)) ** gamma,
        taylor=_abs_pow_taylor(gamma, odd=False),
        membership=_CATALOG["abs_pow"]["membership"],
        moments=mom(),
    )


@_register(
    "odd_abs_pow",
    dim=1,
    defaults={"gamma": 2.0},
    membership="gamma > 0: in every L^phi on bounded domains",
    notes="sign(x)|x|^gamma; gamma=2 is x|x|, degree-1 Taylor at 0 is zero",
)
def _make_odd_abs_pow(gamma):
    gamma = float(gamma)
    if gamma <= 0:
        raise DomainError("odd_abs_pow needs gamma > 0")

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.abs(x) ** gamma

    return TestFunction(
        name="odd_abs_pow",
        dim=1,
        params={"gamma": gamma},
        fn=f,
        taylor=_abs_pow_taylor(gamma, odd=True),
        membership=_CATALOG["odd_abs_pow"]["membership"],
        moments=(0.0, 2.0 / (gamma + 2.0)),
    )


@_register(
    "sign_step",
    dim=1,
    defaults={"amp": 2.0},
    membership="bounded: in every L^phi",
    notes="amp*sign(x); jump at 0, sign(0)=0 on the grid never sampled",
)
def _make_sign_step(amp):
    amp = float(amp)

    def taylor(x, degree):
        x0 = float(np.atleast_1d(x)[0])
        if x0 == 0.0:
            return None
        c = np.zeros(degree + 1)
        c[0] = amp * math.copysign(1.0, x0)
        return Polynomial(1, degree, c, np.atleast_1d(x0))

    return TestFunction(
        name="sign_step",
        dim=1,
        params={"amp": amp},
        fn=lambda x: amp * np.sign(np.asarray(x, dtype=float)),
        taylor=taylor,
        membership=_CATALOG["sign_step"]["membership"],
        moments=(0.0, amp),
    )


@_register(
    "sing_pow",
    dim=1,
    defaults={"beta": 0.75},
    membership=(
        "|x|^(-beta): integrable iff beta < 1; |x|^(-2 beta) integrable "
        "iff beta < 1/2, so for phi(s)=s^2 and beta in [1/2, 1) the "
        "psi_plus modular is finite but the phi modular is not"
    ),
    notes="integrable singularity at 0; exact cell averages available",
)
def _make_sing_pow(beta):
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise DomainError("sing_pow needs beta in (0,1) for an integrable pole")

    def f(x):
        return np.abs(np.asarray(x, dtype=float)) ** (-beta)

    def antideriv(x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * np.abs(x) ** (1.0 - beta) / (1.0 - beta)

    def cell_average(lo, hi):
        return (antideriv(hi) - antideriv(lo)) / (hi - lo)

    def taylor(x, degree):
        x0 = float(np.atleast_1d(x)[0])
        if x0 == 0.0:
            return None
        return _abs_pow_taylor(-beta, odd=False)(x, degree)

    return TestFunction(
        name="sing_pow",
        dim=1,
        params={"beta": beta},
        fn=f,
        cell_average=cell_average,
        taylor=taylor,
        membership=_CATALOG["sing_pow"]["membership"],
        moments=(2.0 / (1.0 - beta), 0.0),
    )


@_register(
    "sign_perturbed_pow",
    dim=1,
    defaults={"gamma": 2.0, "delta": 0.1},
    membership="bounded on bounded domains: in every L^phi",
    notes="|x|^gamma (1 + delta sign(x)): smooth of order floor(gamma-) at 0 "
    "despite the jump in the gamma-th difference quotient",
)
def _make_sign_perturbed_pow(gamma, delta):
    gamma = float(gamma)
    delta = float(delta)
    if gamma <= 0:
        raise DomainError("sign_perturbed_pow needs gamma > 0")

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.abs(x) ** gamma * (1.0 + delta * np.sign(x))

    def taylor(x, degree):
        x0 = float(np.atleast_1d(x)[0])
        if x0 != 0.0:
            scale = 1.0 + delta * math.copysign(1.0, x0)
            base = _abs_pow_taylor(gamma, odd=False)(x, degree)
            return Polynomial(
                1, degree, np.asarray(base.coeffs) * scale, base.center
            )
        if gamma > degree:
            return Polynomial.zero(1, degree, center=np.zeros(1))
        return None

    mass = 2.0 / (gamma + 1.0)
    first = 2.0 * delta / (gamma + 2.0)
    return TestFunction(
        name="sign_perturbed_pow",
        dim=1,
        params={"gamma": gamma, "delta": delta},
        fn=f,
        taylor=taylor,
        membership=_CATALOG["sign_perturbed_pow"]["membership"],
        moments=(mass, first),
    )


@_register(
    "sine",
    dim=1,
    defaults={"freq": 1.0, "amp": 1.0},
    membership="bounded: in every L^phi",
    notes="amp*sin(pi*freq*x); smooth, used as a continuity bump",
)
def _make_sine(freq, amp):
    freq = float(freq)
    amp = float(amp)
    w = math.pi * freq

    def f(x):
        return amp * np.sin(w * np.asarray(x, dtype=float))

    def taylor(x, degree):
        x0 = float(np.atleast_1d(x)[0])
        coeffs = [
            amp * w**k * math.sin(w * x0 + k * math.pi / 2.0) / math.factorial(k)
            for k in range(degree + 1)
        ]
        return Polynomial(1, degree, np.asarray(coeffs), np.atleast_1d(x0))

    return TestFunction(
        name="sine",
        dim=1,
        params={"freq": freq, "amp": amp},
        fn=f,
        taylor=taylor,
        membership=_CATALOG["sine"]["membership"],
        moments=(0.0, amp * 2.0 * (math.sin(w) / w**2 - math.cos(w) / w)),
    )


# -- 2-D entries ----------------------------------------------------------


@_register(
    "poly2",
    dim=2,
    defaults={"degree": 1, "coeffs": (0.0, 1.0, 1.0), "center": (0.0, 0.0)},
    membership="in every L^phi on bounded domains",
    notes="coeffs follow graded lexicographic multi-index order",
)
def _make_poly2(degree, coeffs, center):
    degree = int(degree)
    coeffs = np.asarray([float(c) for c in np.atleast_1d(coeffs)])
    if coeffs.size != space_dimension(2, degree):
        raise DomainError(
            f"poly2 degree {degree} needs {space_dimension(2, degree)} "
            f"coefficients in graded lexicographic order, got {coeffs.size}"
        )
    P = Polynomial(2, degree, coeffs, np.asarray(center, dtype=float))
    return TestFunction(
        name="poly2",
        dim=2,
        params={
            "degree": degree,
            "coeffs": tuple(coeffs),
            "center": tuple(float(c) for c in np.atleast_1d(center)),
        },
        fn=lambda pts: P(np.asarray(pts, dtype=float)),
        taylor=_poly_taylor(P),
        membership=_CATALOG["poly2"]["membership"],
    )


@_register(
    "radial_pow",
    dim=2,
    defaults={"gamma": 2.0},
    membership="gamma > -2: integrable on bounded planar domains",
    notes="|t|^gamma = (t1^2+t2^2)^(gamma/2); gamma=2 is the paraboloid",
)
def _make_radial_pow(gamma):
    gamma = float(gamma)
    if gamma <= -2.0:
        raise DomainError("radial_pow needs gamma > -2 for an integrable pole")

    def f(pts):
        pts = np.asarray(pts, dtype=float)
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        with np.errstate(divide="ignore"):
            return r**gamma

    def taylor(x, degree):
        x0 = np.atleast_1d(np.asarray(x, dtype=float))
        if np.all(x0 == 0.0):
            if gamma > degree:
                return Polynomial.zero(2, degree, center=np.zeros(2))
            if gamma == 2.0 and degree >= 2:
                d = {(2, 0): 1.0, (0, 2): 1.0}
                return Polynomial.from_coeff_dict(d, 2, degree, center=np.zeros(2))
            return None
        return None  # general off-center derivatives not catalogued

    return TestFunction(
        name="radial_pow",
        dim=2,
        params={"gamma": gamma},
        fn=f,
        taylor=taylor,
        membership=_CATALOG["radial_pow"]["membership"],
    )
