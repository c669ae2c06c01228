"""Exception types shared across the package."""


class AftInfoError(Exception):
    """Base class for all errors raised by aftinfo."""


class DomainError(AftInfoError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class InfiniteMeanError(DomainError):
    """The baseline law has no finite mean, so the sampled laws do not exist."""


class UndefinedScoreError(DomainError):
    """The scale score was requested at a point where the density vanishes."""


class NumericalError(AftInfoError, ArithmeticError):
    """A computation produced a non-finite value or failed to converge."""


class ConfigError(AftInfoError):
    """Malformed configuration: bad JSON, unknown, missing or mistyped fields."""
