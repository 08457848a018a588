"""Domain-specific exceptions raised across the package."""


class UwbPoseError(Exception):
    """Base class for all errors raised by this package."""


class InvalidNodeCount(UwbPoseError, ValueError):
    """Node or pair selection needs at least two (and at most five) nodes."""


class InvalidArgument(UwbPoseError, ValueError):
    """A numeric argument is outside its documented range."""


class ParseError(UwbPoseError, ValueError):
    """A data file is malformed; the message names the offending line."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class UnknownSubject(UwbPoseError, KeyError):
    """The requested subject id is not present in the dataset."""


class EmptyTrainingSet(UwbPoseError, ValueError):
    """Fitting requires at least one training sample."""


class DimensionMismatch(UwbPoseError, ValueError):
    """Query feature dimension does not match the fitted model."""


class NeedMultipleSubjects(UwbPoseError, ValueError):
    """Subject-wise validation requires at least two subjects."""


class EmptyBatch(UwbPoseError, ValueError):
    """Gradient evaluation requires a non-empty batch."""


class LengthMismatch(UwbPoseError, ValueError):
    """Paired label sequences must have equal length."""


class InvalidLabel(UwbPoseError, ValueError):
    """A class label is outside the nine-way range 0..8."""


class EmptyMatrix(UwbPoseError, ValueError):
    """Metrics are undefined on an all-zero confusion matrix."""


class EmptyInput(UwbPoseError, ValueError):
    """The operation requires a non-empty input sequence."""


class InvalidStream(UwbPoseError, ValueError):
    """A replayed range stream has decreasing timestamps."""
