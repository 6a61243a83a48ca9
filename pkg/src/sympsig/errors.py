"""Exception hierarchy shared by every module.

Validation problems (bad shapes, non-symplectic input, unsupported
holonomy classes) derive from :class:`ValidationError`; numerical
failures (quadrature or extrapolation that does not meet its tolerance)
derive from :class:`NumericalError`.  The CLI maps the two families to
distinct exit codes.
"""

from __future__ import annotations


class SympSigError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SympSigError, ValueError):
    """Input does not satisfy a documented precondition."""


class DimensionError(ValidationError):
    """Matrix has the wrong shape (for instance odd dimension)."""


class ClassificationError(ValidationError):
    """Holonomy is not of the class an operation requires."""


class AmbiguityError(ClassificationError):
    """An eigenvalue sits too close to the unit circle (or to +-1) to classify."""

    def __init__(self, message: str, eigenvalue: complex):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class CompatibilityError(ValidationError):
    """A complex structure is not compatible with the symplectic form."""


class SingularActionError(ValidationError):
    """Moebius denominator is singular for the given point."""


class PotentialSingularityError(ValidationError):
    """Kaehler potential evaluated on the divisor of its base point."""


class DegenerateInputError(ValidationError):
    """Zero tangent vector or similar degenerate request."""


class UnsupportedHolonomyError(ValidationError):
    """No implemented fixed point / logarithm for this holonomy."""


class RelationError(ValidationError):
    """Generator images do not satisfy the surface-group relation."""


class FixtureError(ValidationError):
    """Malformed fixture file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class NumericalError(SympSigError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class ConvergenceError(NumericalError):
    """Quadrature or extrapolation did not converge.

    ``estimate`` is the error estimate that exceeded the tolerance and
    ``partial`` the best value obtained, when one exists.
    """

    def __init__(self, message: str, estimate: float = float("nan"),
                 partial: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.partial = partial


class IntegralityError(NumericalError):
    """2T + rho is too far from an integer to be a signature."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class InconsistencyError(NumericalError):
    """Derived quantities contradict each other (negative dimension, parity)."""
