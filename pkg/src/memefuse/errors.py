"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code so failures stay diagnosable from
scripts: config errors exit 2, training errors 3, data validation 4,
undefined metrics 5.
"""


class MemefuseError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(MemefuseError):
    """Invalid configuration: bad mode, unknown key, inconsistent fields."""

    exit_code = 2


class TrainingError(MemefuseError):
    """Training diverged or could not proceed."""

    exit_code = 3


class DataError(MemefuseError):
    """Dataset files are malformed, truncated, or violate invariants."""

    exit_code = 4


class MetricError(MemefuseError):
    """A metric is undefined on the given inputs (e.g. single-class AUC)."""

    exit_code = 5
