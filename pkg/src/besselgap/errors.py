"""Exception hierarchy.

ValidationError marks rejected inputs (CLI exit 2); the numerical failures
all derive from NumericalError (CLI exit 3).
"""


class BesselgapError(Exception):
    """Base class for package errors."""


class ValidationError(BesselgapError, ValueError):
    """Inadmissible parameters or configuration."""


class DegenerateParametersError(ValidationError):
    """Consecutive multipliers or radii coincide.

    The generating function then equals the one with the offending component
    removed, so callers should reduce k and retry.
    """


class NumericalError(BesselgapError, RuntimeError):
    """Base class for runtime numerical failures."""


class QuadratureConvergenceError(NumericalError):
    """Node doubling did not converge; carries the last two determinants."""

    def __init__(self, message, last_values=None):
        super().__init__(message)
        self.last_values = last_values


class SingularOperatorError(NumericalError):
    """LU hit an exactly singular matrix."""


class IntegrationError(NumericalError):
    """ODE integration failed; carries the last good abscissa.

    partial holds the dense solution accepted so far (may be None).
    """

    def __init__(self, message, last_xi=None, partial=None):
        super().__init__(message)
        self.last_xi = last_xi
        self.partial = partial


class ConditioningError(NumericalError):
    """Computation refused because conditioning would make it meaningless."""


class TailMassError(NumericalError):
    """Aliasing tail of a coefficient extraction exceeds the tolerance."""
