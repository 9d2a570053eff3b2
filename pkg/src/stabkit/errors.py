"""Exception hierarchy.

Everything raised on bad input derives from ``StabkitError`` so callers can
catch one type at the boundary. The CLI maps subclasses to exit codes:
``ConfigError`` -> 1, data-shaped errors -> 2, oracle check failures -> 3.
"""


class StabkitError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(StabkitError):
    """A run configuration is malformed or internally inconsistent."""


class DataError(StabkitError):
    """An input file or in-memory data structure violates its contract."""


class VariantError(DataError):
    """Variant notation or mutation application is invalid."""


class TableError(DataError):
    """A likelihood table (or its companion files) is invalid."""


class DatasetError(DataError):
    """An experimental dataset file is invalid."""


class ModelError(DataError):
    """A sequence model (frequency or candidate marginal) is invalid."""


class LatticeError(StabkitError):
    """A lattice-model operation was given invalid or degenerate input."""


class EvaluationError(StabkitError):
    """An evaluation metric or harness step cannot be computed."""


class OracleCheckError(StabkitError):
    """An oracle verification check failed (distinct from bad input)."""
