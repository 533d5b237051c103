"""Exception types shared across the package."""


class ScarThermoError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ScarThermoError, ValueError):
    """Argument has the wrong shape, range or structure."""


class InsufficientDataError(ScarThermoError):
    """Not enough levels, records or bins to compute a statistic."""


class OutOfRangeError(ScarThermoError, ValueError):
    """Energy lies outside the open spectral interval, so beta diverges."""


class DegenerateScarError(ScarThermoError):
    """The zero-energy subspace mixes the product state with other states."""


class NumericalError(ScarThermoError, ArithmeticError):
    """A numerical routine produced a non-finite or inconsistent result."""


class ConfigError(ScarThermoError, ValueError):
    """Run configuration is invalid. ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
