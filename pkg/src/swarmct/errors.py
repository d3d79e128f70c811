"""Exception types shared by every module.

The CLI maps each class to its own exit code, so raise the narrowest one.
"""


class SwarmError(Exception):
    exit_code = 1


class ArgumentError(SwarmError, ValueError):
    """Bad argument value (negative sigma, index out of range, shape mismatch)."""

    exit_code = 2


class ConfigurationError(SwarmError, ValueError):
    """Inconsistent geometry, architecture or run configuration."""

    exit_code = 3


class StorageError(SwarmError, OSError):
    """Missing or unwritable file."""

    exit_code = 4


class NumericError(SwarmError, ArithmeticError):
    """Non-finite values appeared during a computation."""

    exit_code = 5
