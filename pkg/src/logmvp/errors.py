"""Exception hierarchy shared by all modules."""


class LogMVPError(Exception):
    """Base class for errors raised by this package."""


class DomainError(LogMVPError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(LogMVPError, ValueError):
    """Inconsistent or unsupported configuration (unknown family, bad order, ...)."""


class MisuseError(LogMVPError, TypeError):
    """A check was applied to a field whose classification does not allow it."""


class EvaluationError(LogMVPError, ArithmeticError):
    """A field returned a non-finite value at a quadrature node or walk point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point
