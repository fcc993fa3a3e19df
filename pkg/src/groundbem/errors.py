"""Exception types shared across the package."""


class GroundBemError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GroundBemError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(GroundBemError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the achieved absolute error estimate so callers can decide
    whether the value is still usable.
    """

    def __init__(self, message, estimate=None, value=None):
        super().__init__(message)
        self.estimate = estimate
        self.value = value


class MeshFormatError(GroundBemError, ValueError):
    """A mesh file is malformed or describes an invalid mesh."""


class SolveError(GroundBemError):
    """The linear system could not be solved reliably."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
