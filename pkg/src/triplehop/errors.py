"""Exception hierarchy shared across the package.

Two broad families matter to callers: ``UsageError`` (bad arguments,
maps to exit code 1 in the CLI) and ``DataError`` (broken input data or
on-disk artifacts, exit code 2). Everything raised by this package
derives from ``TripleHopError`` except plain ``ValueError`` for
programming-contract violations.
"""


class TripleHopError(Exception):
    """Base class for all package-specific errors."""


class UsageError(TripleHopError):
    """Invalid request parameters (bad hop count, partition count, flags)."""


class DataError(TripleHopError):
    """Malformed input data or on-disk artifact."""


class ParseError(DataError):
    """A triple record failed to parse. Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ArchiveError(DataError):
    """Base for binary archive load failures."""


class BadMagicError(ArchiveError):
    pass


class VersionError(ArchiveError):
    pass


class TruncatedError(ArchiveError):
    pass


class ChecksumError(ArchiveError):
    pass


class IntegrityError(DataError):
    """Cross-file inconsistency (manifest counts, missing shards, id ranges)."""


class OracleSizeError(UsageError):
    """A reference oracle was asked to run past its size guard."""
