"""Exception types shared across the toolkit."""


class HomkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(HomkitError):
    """Raised on malformed input text; carries a line/column position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}" + (f", col {column}" if column is not None else "") + f": {message}"
        super().__init__(message)


class SignatureMismatchError(HomkitError):
    """Two structures that must share a signature do not."""


class InvalidStructureError(HomkitError):
    """A structure or lift violates a construction invariant."""


class NotATreeError(HomkitError):
    """An operation requiring a tree/forest received a cyclic input.

    `cycle` holds a witness as a list of (symbol, tuple) pairs when known.
    """

    def __init__(self, message, cycle=None):
        self.cycle = cycle
        super().__init__(message)


class GuardExceededError(HomkitError):
    """A configurable size cap was hit; the operation refuses to continue."""


class GirthTooSmallError(HomkitError):
    """An operation requiring high girth received a short cycle (attached)."""

    def __init__(self, message, cycle=None):
        self.cycle = cycle
        super().__init__(message)
