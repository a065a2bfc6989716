"""Exception types shared across the package."""


class StvarError(Exception):
    """Base class for all stvarkit errors."""


class ShapeError(StvarError):
    """Array has the wrong shape for the requested operation."""


class ParameterError(StvarError):
    """Parameter value outside its admissible region."""


class DomainError(StvarError):
    """Function argument outside its domain (e.g. probability not in (0,1))."""


class SingularMatrixError(StvarError):
    """Matrix singular to working precision.

    Carries optional context about when the singular combination occurred.
    """

    def __init__(self, message, t=None, weights=None):
        super().__init__(message)
        self.t = t
        self.weights = weights


class NumericError(StvarError):
    """Numerical routine failed to converge."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class ConfigError(StvarError):
    """Invalid run configuration or input file."""


class EmptySelectionError(StvarError):
    """A filter or screen left nothing to work with."""
