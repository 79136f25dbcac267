"""Exception types shared across the package."""


class DgffTrapError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(DgffTrapError, ValueError):
    """A parameter violates a documented precondition."""


class ResourceLimitError(DgffTrapError, RuntimeError):
    """A size guard was exceeded (pass override=True to lift it)."""


class BudgetExceededError(DgffTrapError, RuntimeError):
    """A simulation ran out of its step budget before reaching its horizon."""

    def __init__(self, message, steps_completed=None):
        super().__init__(message)
        self.steps_completed = steps_completed


class ParseError(DgffTrapError, ValueError):
    """A serialized artifact could not be read back."""


class ConfigurationError(DgffTrapError, RuntimeError):
    """An experiment configuration cannot be satisfied (e.g. retry budget)."""
