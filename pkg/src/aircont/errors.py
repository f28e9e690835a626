"""Exception hierarchy shared by all aircont modules."""


class AirContError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(AirContError, ValueError):
    """An input value is out of range, non-finite or otherwise malformed."""


class DimensionError(ValidationError):
    """Array shapes do not agree with what the operation needs."""


class FeasibilityError(ValidationError):
    """A timing constraint (delay vs. sampling period) cannot be met."""


class DegenerateChannelError(AirContError, ArithmeticError):
    """A channel coefficient is zero where the scaling policy must divide by it."""


class NumericalError(AirContError, ArithmeticError):
    """An iterative kernel failed to converge."""


class ConfigError(ValidationError):
    """A configuration file could not be parsed or contains unknown keys."""
