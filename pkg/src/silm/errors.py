"""Exception types shared across the package."""


class SilmError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SilmError, ValueError):
    """Matrix shapes are incompatible with the requested operation."""


class ValidationError(SilmError, ValueError):
    """An input violates a documented precondition.

    ``problems`` holds every violation found, so callers can report them
    together instead of one at a time.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]


class DomainError(SilmError, ArithmeticError):
    """A numerical operation left its domain (e.g. non-HPD input)."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
