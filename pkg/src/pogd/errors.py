"""Exception types shared across the package."""


class DimensionError(ValueError):
    """An array argument has the wrong length or an invalid dimension."""


class NonFiniteError(ValueError):
    """A gradient, objective value, or loss contains NaN or infinity."""


class DataFormatError(ValueError):
    """A dataset file is malformed: bad magic, truncation, or bad records."""


class ConfigError(ValueError):
    """An experiment config failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RunAborted(RuntimeError):
    """A training run hit a non-finite loss and stopped early.

    The metrics gathered up to (and including) the failure record are
    attached so callers can inspect the partial run.
    """

    def __init__(self, message: str, records: list):
        self.records = records
        super().__init__(message)
