"""Exception hierarchy shared across the package.

ConfigError maps to CLI exit code 2, DataError to 3. I/O failures are
left as the builtin OSError family and map to exit code 4.
"""


class HrvSonifyError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(HrvSonifyError, ValueError):
    """Invalid configuration value or inconsistent parameter set."""


class DataError(HrvSonifyError, ValueError):
    """Input data violates a precondition (bad file content, degenerate
    series, zero-variance column, and so on)."""
