"""Exception types shared across the toolkit."""


class StabilikitError(Exception):
    """Base class for all stabilikit errors."""


class DegenerateInput(StabilikitError):
    """Point set too degenerate for hull construction (< 3 distinct points or all collinear)."""


class DegenerateGeometry(StabilikitError):
    """Camera/ray configuration unusable for triangulation (zero baseline, near-parallel rays)."""


class MissingObservation(StabilikitError):
    """A required joint or observation is invalid or absent."""


class FrameMismatch(StabilikitError):
    """Two frames disagree on index or joint-set layout."""


class DegeneratePlacement(StabilikitError):
    """Ankle and toe project too close together to orient an insole grid."""


class EmptyField(StabilikitError):
    """No pressure cell exceeds the threshold (airborne or invalid frame)."""


class ShapeMismatch(StabilikitError):
    """Array or layout shape disagrees with model parameters."""


class EmptyDataset(StabilikitError):
    """Training requested on an empty dataset."""


class NonFiniteLoss(StabilikitError):
    """Training loss became NaN/Inf; carries diagnostics in the message."""


class InsufficientSubjects(StabilikitError):
    """Leave-one-subject-out splits need at least two subjects."""


class ZeroVariance(StabilikitError):
    """Correlation undefined because one series has zero variance."""


class LengthMismatch(StabilikitError):
    """Paired series have different lengths."""


class EmptyInput(StabilikitError):
    """Statistics requested on an empty sample."""


class NoValidFrames(StabilikitError):
    """A series contains no valid frames to aggregate."""


class SeriesTooShort(StabilikitError):
    """Series too short for the requested filter."""


class StreamMisalignment(StabilikitError):
    """Pose and pressure streams disagree on frame indices."""


class InvalidProgram(StabilikitError):
    """Unknown synthetic motion program."""


class ParseError(StabilikitError):
    """A data file failed to parse; records file, line and reason."""

    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class AlignmentError(StabilikitError):
    """Streams of one take disagree; records the first mismatching frame index."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message if index is None else f"{message} (first mismatch at frame {index})")


class ExcludedTake(StabilikitError):
    """The manifest marks this take as excluded; message carries the reason."""
