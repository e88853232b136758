"""Exception types shared across the package."""


class MsepError(Exception):
    """Base class for package errors."""


class PreconditionError(MsepError, ValueError):
    """An operation was called on input that violates its precondition."""


class InstanceTooLarge(PreconditionError):
    """An exhaustive oracle refused an instance above its size guard."""


class FormatError(MsepError, ValueError):
    """A file did not follow the expected format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
