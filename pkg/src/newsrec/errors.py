"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, DataError -> 3,
ContractViolation -> 4.
"""


class NewsrecError(Exception):
    """Base class for all package errors."""


class ConfigError(NewsrecError):
    """Invalid or inconsistent run configuration."""


class DataError(NewsrecError):
    """Malformed, missing, or insufficient input data."""


class ContractViolation(NewsrecError):
    """An internal invariant was broken (e.g. state mutated while frozen)."""
