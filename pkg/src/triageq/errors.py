"""Exception types shared across the package."""


class TriageQError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(TriageQError):
    """Invalid input data. Carries the offending field name when known."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class MissingInputError(TriageQError):
    """An inference was attempted without a value for a required variable."""

    def __init__(self, variable):
        super().__init__(f"no value supplied for input variable '{variable}'")
        self.variable = variable


class CoverageError(TriageQError):
    """A linguistic variable leaves part of its universe with zero membership."""


class NoRuleFiredError(TriageQError):
    """No rule produced a positive strength; the rule base does not cover the input."""


class StaleRecordError(TriageQError):
    """An activation record from a different epoch was offered to update()."""


class SchemaError(TriageQError):
    """A persisted document does not match the expected schema or version."""


class NotFoundError(TriageQError):
    """Lookup of an unknown identifier."""
