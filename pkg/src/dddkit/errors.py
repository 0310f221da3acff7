"""Exception hierarchy.

Errors are grouped so the CLI can map them onto exit codes: ``ConfigError``
subclasses exit with 2, ``DataError`` with 3 and everything else derived from
``DDDError`` with 4.
"""


class DDDError(Exception):
    """Base class for every error raised by dddkit."""


class ConfigError(DDDError, ValueError):
    pass


class DataError(DDDError, ValueError):
    pass


# -- signal_core -------------------------------------------------------------

class ChannelNotFound(DataError, KeyError):
    def __init__(self, channel):
        self.channel = channel
        super().__init__(f"channel not found: {channel!r}")

    def __str__(self):
        return self.args[0]


class UnsupportedResample(DDDError, ValueError):
    pass


class RateMismatch(DataError):
    pass


# -- dataset_io --------------------------------------------------------------

class SchemaError(DataError):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"missing or malformed column: {column!r}")


class TimestampError(DataError):
    def __init__(self, row, message=None):
        self.row = row
        super().__init__(message or f"non-monotonic timestamp at row {row}")


class InvalidProfile(ConfigError):
    pass


# -- labeling / features / multiwavelet ----------------------------------------

class BandError(DDDError, ValueError):
    pass


class InsufficientData(DDDError, ValueError):
    pass


class InsufficientSamples(DDDError, ValueError):
    pass


class EmptyInput(DDDError, ValueError):
    pass


class ExtractionError(DDDError, ValueError):
    pass


# -- selection / models ------------------------------------------------------

class DegenerateLabels(DDDError, ValueError):
    pass


class BudgetTooSmall(ConfigError):
    pass


class InvalidSearchSpace(ConfigError):
    pass


class FeatureMismatch(DDDError, ValueError):
    pass


# -- pipeline ----------------------------------------------------------------

class SplitError(ConfigError):
    pass


class LeakageNotAcknowledged(ConfigError):
    pass


class PipelineError(DDDError):
    """Wraps an error raised inside one pipeline stage."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
