"""Exception hierarchy shared across the pipeline.

Exit-code mapping (see cli): UsageError -> 1, DataError and subclasses -> 2,
NumericError -> 3.
"""


class QSeedError(Exception):
    """Base class for all package errors."""


class UsageError(QSeedError):
    """Bad flags or configuration values."""


class DataError(QSeedError):
    """Invalid or insufficient input data."""


class SchemaError(DataError):
    """A required column or field is missing."""


class ParseError(DataError):
    """A malformed cell or line; message carries the location."""


class NumericError(QSeedError):
    """Non-finite value encountered during optimization."""
