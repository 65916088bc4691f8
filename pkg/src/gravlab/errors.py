"""Exception types shared across the package."""


class GravLabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GravLabError, ValueError):
    pass


class TruncationError(GravLabError, ValueError):
    """Fock truncation too small for the requested state.

    ``required_dim`` carries the smallest dimension (including the safety
    margin) that would have been accepted.
    """

    def __init__(self, message: str, required_dim: int):
        super().__init__(message)
        self.required_dim = required_dim


class NumericalBreakdownError(GravLabError, ArithmeticError):
    """A stochastic or time step left the valid regime (e.g. zero norm)."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class SingularPotentialError(GravLabError, ArithmeticError):
    pass


class StepSizeError(GravLabError, ValueError):
    pass


class InvalidRegimeError(GravLabError, ValueError):
    pass


class ConfigError(GravLabError, ValueError):
    pass
