"""Exception types shared across the package.

The CLI maps each family to an exit code, so raise the most specific one.
"""


class SpateError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SpateError, ValueError):
    pass


class CapacityError(SpateError):
    """Requested register is larger than the simulator supports."""


class DegenerateInputError(SpateError, ValueError):
    """Input cannot be turned into a valid state (e.g. zero norm)."""


class UndefinedMetricError(SpateError, ValueError):
    """Metric is not defined for the given labels (e.g. a single class)."""


class DatasetError(SpateError):
    """Base for data ingestion problems."""


class DatasetNotFoundError(DatasetError, FileNotFoundError):
    pass


class NonNumericFeatureError(DatasetError, ValueError):
    pass


class InvalidDatasetError(DatasetError, ValueError):
    """Dataset violates a structural requirement (e.g. only one class)."""
