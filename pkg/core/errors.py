"""
core/errors.py - Exception hierarchy

Every error carries the CLI exit code it maps to:
  1 I/O, 2 usage/range, 3 data corruption.
"""

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_CORRUPT = 3


class HexaShrinkError(Exception):
    """Base class for all library errors."""
    exit_code = EXIT_CORRUPT


# ==================== USAGE / RANGE ====================

class UsageError(HexaShrinkError):
    exit_code = EXIT_USAGE


class LevelOutOfRange(UsageError):
    pass


class SpecInvalid(UsageError):
    pass


class CodecUnavailable(UsageError):
    pass


class SlabCoverageGap(UsageError):
    pass


# ==================== DATA ====================

class DataError(HexaShrinkError):
    exit_code = EXIT_CORRUPT


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class MissingDims(DataError):
    pass


class GrdeclSyntaxError(DataError):
    """Malformed GRDECL text, with the offending location."""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class HorizontalFaultViolation(DataError):
    pass


class OverflowRisk(DataError):
    pass


class ValueOutsideUniverse(DataError):
    pass


class CorruptPair(DataError):
    pass


class CorruptDetail(DataError):
    pass


class Unreconstructible(DataError):
    pass


# ==================== CONTAINER ====================

class BadMagic(DataError):
    pass


class VersionUnsupported(DataError):
    pass


class ChecksumMismatch(DataError):
    def __init__(self, chunk: str):
        self.chunk = chunk
        super().__init__(f"checksum mismatch in chunk {chunk}")


class MissingChunk(DataError):
    def __init__(self, chunk: str):
        self.chunk = chunk
        super().__init__(f"missing chunk {chunk}")
