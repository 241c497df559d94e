"""Exception types raised across the pipeline."""


class TumorHistError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(TumorHistError, ValueError):
    pass


class DegenerateInputError(TumorHistError, ValueError):
    """Input has no usable spread (constant brain, empty histogram, ...)."""


class NoSignalError(TumorHistError):
    """A profile or bounding box carries no mass to work with."""


class StageError(TumorHistError):
    """Wraps a failure inside :func:`run_pipeline` with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


class NiftiParseError(TumorHistError, ValueError):
    """Malformed or unsupported NIfTI-1 file.

    ``offset`` is the byte offset of the offending header field, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class BadMagicError(NiftiParseError):
    pass


class UnsupportedDatatypeError(NiftiParseError):
    pass


class NotThreeDimensionalError(NiftiParseError):
    pass
