"""Exception hierarchy shared by the library, the CLI and the HTTP API.

Every error carries the process exit code the CLI returns for it and the
HTTP status the API answers with.
"""


class SpeckleError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 70
    http_status = 500


class UsageError(SpeckleError, ValueError):
    exit_code = 64
    http_status = 400


class DataError(SpeckleError, ValueError):
    """Input data violates a structural or numeric precondition."""

    exit_code = 65
    http_status = 422


class IoError(SpeckleError, OSError):
    exit_code = 66
    http_status = 500


class EquivalenceError(SpeckleError):
    """Streaming and batch activity reports disagree."""

    exit_code = 70
    http_status = 500


# frame_io
class MissingFile(IoError):
    pass


class IoFailure(IoError):
    pass


class MalformedHeader(DataError):
    pass


class BitDepthUnsupported(DataError):
    pass


class TruncatedData(DataError):
    pass


class DimensionMismatch(DataError):
    pass


# activity
class TooManyRegions(DataError):
    pass


class InvalidZ(DataError):
    pass


class PartitionMismatch(DataError):
    pass


class InvalidPixelCount(DataError):
    pass


class InvalidWidth(DataError):
    pass


# wavelet
class DepthTooLarge(DataError):
    pass


class EmptyInput(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class InvalidCount(DataError):
    pass


# hwsim
class DivideByZero(DataError):
    pass


class OverflowDetected(DataError):
    """A register would exceed its declared width."""

    def __init__(self, stage: str, index: int, cycle: int, width: int):
        self.stage = stage
        self.index = index
        self.cycle = cycle
        self.width = width
        super().__init__(
            f"register overflow in stage '{stage}' at index {index}, "
            f"cycle {cycle} (width {width} bits)"
        )
