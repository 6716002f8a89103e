"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Non-finite inputs, malformed sequences, or unusable densities."""


class DomainError(ValueError):
    """A parameter lies outside its documented domain."""


class PgmFormatError(Exception):
    """Malformed or unsupported PGM data."""


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


class NumericConvergenceError(RuntimeError):
    """A quadrature self-check failed to converge."""
