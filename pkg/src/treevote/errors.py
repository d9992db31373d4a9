"""Exception hierarchy shared across the toolkit.

Each error carries the process exit code the CLI maps it to, so the
command layer never has to guess which stage failed.
"""


class TreevoteError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(TreevoteError):
    """Invalid configuration or command arguments."""

    exit_code = 1


class DataLoadError(TreevoteError):
    """Input data could not be parsed or does not match its schema."""

    exit_code = 2


class DegenerateDataError(TreevoteError):
    """Data unusable for modelling (single class, no retained features)."""

    exit_code = 3


class OutputWriteError(TreevoteError):
    """Report bundle could not be written."""

    exit_code = 4


class SchemaMismatchError(TreevoteError):
    """A row or model does not conform to the expected schema."""


class DegenerateTableError(TreevoteError):
    """Contingency table has no testable association after dropping
    empty rows and columns."""


class AucUndefinedError(TreevoteError):
    """ROC analysis needs at least one positive and one negative row."""
