"""Exception hierarchy shared by the library and the command line.

Each class carries the process exit code the CLI maps it to.
"""


class SemblanceError(Exception):
    exit_code = 1


class ConfigError(SemblanceError, ValueError):
    """Bad parameters, flags or configuration."""

    exit_code = 1


class DataError(SemblanceError, ValueError):
    """Malformed, non-finite or dimensionally inconsistent input data."""

    exit_code = 2


class NumericError(SemblanceError, ArithmeticError):
    """A numerical check failed (for example a PSD certificate)."""

    exit_code = 3
