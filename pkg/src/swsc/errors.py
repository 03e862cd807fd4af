"""Exception types shared across the package."""


class SwscError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(SwscError, ValueError):
    """Operands have incompatible or invalid dimensions."""


class ParameterError(SwscError, ValueError):
    """A parameter is outside its documented range."""


class NumericalError(SwscError, ArithmeticError):
    """An iterative routine failed to converge; carries diagnostics in the message."""


class FormatError(SwscError, ValueError):
    """A file does not conform to the expected binary layout.

    ``offset`` is the byte position at which the problem was detected,
    when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class IntegrityError(SwscError, ValueError):
    """In-memory compressed data is internally inconsistent."""
