"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class StraddleMLError(Exception):
    """Base class for package errors."""


class ConfigError(StraddleMLError):
    """Invalid experiment configuration (bad schema, bad value, unknown key)."""


class DataError(StraddleMLError):
    """Invalid or insufficient market data (parse failures, broken invariants)."""
