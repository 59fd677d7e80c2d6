"""
Exceptions raised by frnet. All of them derive from ValueError, so callers
that only distinguish 'bad input' from 'bug' can catch that.
"""


class ShapeError(ValueError):
    """Raised when tensor shapes are invalid or do not match"""


class UnsupportedSizeError(ValueError):
    """Raised when a transform length is not a power of two"""


class FormatError(ValueError):
    """Raised when a file has a bad magic, version or does not fit the configuration"""


class IntegrityError(FormatError):
    """Raised when a file is truncated or its record count disagrees with its manifest"""
