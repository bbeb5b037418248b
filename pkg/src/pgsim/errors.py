"""Exception hierarchy for pgsim.

Exit-code mapping used by the CLI: configuration problems (bad spec files,
unknown families) raise SpecError; numerical failures raise NumericalError
subclasses; verification failures are reported, not raised.
"""


class PgsimError(Exception):
    """Base class for all pgsim errors."""


class SpecError(PgsimError):
    """Invalid or inconsistent user input (spec files, shapes, options)."""


class ParameterError(PgsimError, ValueError):
    """Model parameters outside their admissible domain."""


class DomainError(PgsimError, ValueError):
    """Function argument outside its mathematical domain (e.g. u > 1)."""


class NumericalError(PgsimError):
    """Base class for runtime numerical failures."""


class InfiniteMomentError(NumericalError):
    """Mean or variance does not exist for the requested parameterization."""


class IntegrationError(NumericalError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class FitError(NumericalError):
    """An optimizer failed to produce an acceptable fit."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotPositiveDefiniteError(NumericalError):
    """A correlation matrix or Toeplitz system is not positive definite."""


class InfeasibleCorrelationError(NumericalError):
    """A target correlation exceeds the maximum feasible value.

    Carries the offending value and the feasible limit so callers can
    report exactly which constraint failed.
    """

    def __init__(self, message, target=None, limit=None, pair=None):
        super().__init__(message)
        self.target = target
        self.limit = limit
        self.pair = pair
