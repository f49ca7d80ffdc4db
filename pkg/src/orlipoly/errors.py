"""Exception taxonomy shared across the package.

Every failure mode callers are expected to branch on gets its own class, so
the CLI can map exceptions to exit codes and machine-readable records
without string matching.
"""


class OrlipolyError(Exception):
    """Base class for all package errors."""


class DomainError(OrlipolyError, ValueError):
    """An argument lies outside the mathematical domain of an operation
    (negative modular argument, non-monotone generator data, empty mask,
    perturbation not dominated by its envelope, ...)."""


class RangeError(OrlipolyError, ValueError):
    """Evaluation requested beyond the declared working range of a
    generator."""


class MembershipError(DomainError):
    """Sampled data fails a required integrability check on the grid."""


class NumericError(OrlipolyError, ArithmeticError):
    """A non-finite value appeared where finite numbers are required.

    Carries ``point_index`` and ``point`` naming the first offending
    quadrature node when the failure came from an integrand.
    """

    def __init__(self, message, point_index=None, point=None):
        super().__init__(message)
        self.point_index = point_index
        self.point = point


class SolverError(OrlipolyError, RuntimeError):
    """The iterative solver did not certify a solution within its budget.

    ``trace`` holds the objective history so the failure can be inspected.
    """

    def __init__(self, message, trace=None, result=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
        self.result = result


class ExtensionError(SolverError):
    """The truncation scheme did not stabilise within the level schedule."""


class ConfigError(OrlipolyError, ValueError):
    """A config file is malformed.  ``field`` names the offending entry
    as ``section.key``."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
