"""Exception hierarchy shared by every module."""


class SpcError(Exception):
    """Base class for all errors raised by specpc."""


class ConfigError(SpcError, ValueError):
    """Inconsistent dimensions or invalid parameters."""


class FormatError(SpcError):
    """Malformed or truncated file.

    ``offset`` is the byte offset at which decoding failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DataRangeError(SpcError, ValueError):
    """A requested interval or index lies outside the available data."""
