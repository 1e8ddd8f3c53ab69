"""Exception types shared across the package."""


class NlfaError(Exception):
    """Base class for every error raised by this package."""


class ParseError(NlfaError, ValueError):
    """A rating line could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DomainError(NlfaError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(NlfaError, ValueError):
    """A configuration value is missing, malformed, or out of range."""


class NumericError(NlfaError, ArithmeticError):
    """A non-finite value appeared during a numeric computation."""
