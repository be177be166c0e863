"""Exception types raised across the package."""


class BeurlingError(Exception):
    """Base class for all package errors."""


class ConfigError(BeurlingError, ValueError):
    """Malformed system, function or run configuration."""


class RangeError(BeurlingError, ValueError):
    """An argument lies outside the range covered by a table or system."""


class DomainError(BeurlingError, ValueError):
    """A function value needed by an operation is missing or invalid."""


class ResourceError(BeurlingError, RuntimeError):
    """A configured size cap would be exceeded."""


class NumericalError(BeurlingError, ArithmeticError):
    """A numerical procedure failed its own accuracy check."""


class HypothesisWarning(UserWarning):
    """A theorem hypothesis is not met by the data; results are still computed."""
