"""Exception hierarchy.

Each family maps to one CLI exit status: format/I-O problems, capacity
problems and integrity failures are kept apart so callers can tell a bad
file from a wrong key.
"""


class StegoError(Exception):
    """Base class for every error raised by this package."""


# container / format problems -------------------------------------------------

class FormatError(StegoError, ValueError):
    pass


class MalformedHeader(FormatError):
    pass


class UnsupportedMaxval(FormatError):
    pass


class TruncatedData(FormatError):
    pass


class NotRiff(FormatError):
    pass


class UnsupportedCodec(FormatError):
    pass


class TruncatedChunk(FormatError):
    pass


class DimensionMismatch(FormatError):
    pass


# capacity ---------------------------------------------------------------------

class CapacityError(StegoError, ValueError):
    pass


class CapacityExceeded(CapacityError):
    pass


class ClipTooSmall(CapacityError):
    pass


class OutOfRange(CapacityError):
    pass


# integrity (wrong key, corruption) ------------------------------------------------

class IntegrityError(StegoError):
    pass


class BadMagic(IntegrityError):
    pass


class UnsupportedVersion(IntegrityError):
    pass


class CrcMismatch(IntegrityError):
    pass


class SeedZero(StegoError, ValueError):
    pass
