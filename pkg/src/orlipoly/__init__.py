"""Best polynomial approximation under convex modulars with kinked
derivatives: generators, quadrature domains, the certified solver, the
truncation-based extension, and shrinking-ball local fits."""

from .errors import (
    ConfigError,
    DomainError,
    ExtensionError,
    MembershipError,
    NumericError,
    OrlipolyError,
    RangeError,
    SolverError,
)
from .generators import (
    OrliczFunction,
    PiecewiseLinearGenerator,
    PiecewisePowerGenerator,
    PowerGenerator,
    TableGenerator,
    estimate_delta2,
    make_generator,
    ratio_bounds,
    verify_structure,
)
from .domains import QuadDomain, SampledFunction
from .polynomials import (
    Polynomial,
    estimate_coeff_sup_ratio,
    estimate_norm_equivalence,
    multi_indices,
    space_dimension,
)
from .solver import (
    ApproxProblem,
    ApproxResult,
    characterization_residual,
    make_test_set,
    minimizer_mass_bound,
    one_sided_derivative,
    solve,
)
from .extension import (
    ExtensionRun,
    continuity_probe,
    extend,
    extended_mass_bound,
    extended_residual,
    membership_report,
    truncate,
)
from .local_fit import (
    LocalFitTrace,
    LocalProblem,
    convergence_experiment,
    estimate_local_constants,
    local_fit,
    reference_uniqueness_probe,
    sandwich_records,
    smoothness_ratio,
)
from .registry import TestFunction, list_functions, make_function
from .estimator import OrliczPolynomialApproximator

__version__ = "0.1.0"

__all__ = [
    "ApproxProblem",
    "ApproxResult",
    "ConfigError",
    "DomainError",
    "ExtensionError",
    "ExtensionRun",
    "LocalFitTrace",
    "LocalProblem",
    "MembershipError",
    "NumericError",
    "OrliczFunction",
    "OrliczPolynomialApproximator",
    "OrlipolyError",
    "PiecewiseLinearGenerator",
    "PiecewisePowerGenerator",
    "Polynomial",
    "PowerGenerator",
    "QuadDomain",
    "RangeError",
    "SampledFunction",
    "SolverError",
    "TableGenerator",
    "TestFunction",
    "characterization_residual",
    "continuity_probe",
    "convergence_experiment",
    "estimate_coeff_sup_ratio",
    "estimate_delta2",
    "estimate_local_constants",
    "estimate_norm_equivalence",
    "extend",
    "extended_mass_bound",
    "extended_residual",
    "list_functions",
    "local_fit",
    "make_function",
    "make_generator",
    "make_test_set",
    "minimizer_mass_bound",
    "multi_indices",
    "one_sided_derivative",
    "ratio_bounds",
    "reference_uniqueness_probe",
    "sandwich_records",
    "smoothness_ratio",
    "solve",
    "space_dimension",
    "truncate",
    "verify_structure",
]
