"""Exception hierarchy shared by all dampid modules."""


class DampidError(Exception):
    """Base class for every error raised by the package."""


class DomainError(DampidError, ValueError):
    """An argument lies outside the admissible set (prior set, grid, [0, 1], ...)."""


class SingularParameterError(DomainError):
    """The coefficient sits on a value where the growth rate is unbounded."""


class NumericalError(DampidError, ArithmeticError):
    """Quadrature or synthesis produced non-finite numbers."""


class ZeroSignalError(DampidError):
    """The observed window carries (numerically) no energy."""


class PriorSetError(DampidError):
    """An estimated growth rate has no preimage in the prior set.

    The raw estimate is kept on the exception so sweeps can log it.
    """

    def __init__(self, message, f_hat):
        super().__init__(message)
        self.f_hat = f_hat


class CoefficientDegeneracyError(DampidError):
    """An observation coefficient is too small to divide by."""


class BoundUnavailable(DampidError):
    """The disturbance error bound is undefined (signal-to-noise ratio too low)."""


class GapWindowError(DomainError):
    """The window is too short for the Ingham lower bound."""
