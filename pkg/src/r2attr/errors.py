"""Exception hierarchy. The CLI maps each family to an exit code."""


class AttributionError(Exception):
    """Base class for all package errors."""


class DataError(AttributionError, ValueError):
    """Malformed or unusable input data."""


class NumericalError(AttributionError, ArithmeticError):
    """A numerical precondition failed during fitting or decomposition."""


class RankDeficiencyError(NumericalError):
    def __init__(self, message, dependent=()):
        super().__init__(message)
        self.dependent = tuple(dependent)


class AllChannelsFilteredError(NumericalError):
    """Hybrid filtering removed every channel."""


class DALimitError(AttributionError, ValueError):
    """Dominance analysis requested for more variables than the configured limit."""
