"""Exception hierarchy shared by the coding, wire and simulation layers."""


class SneedError(Exception):
    """Base class for every error raised by this package."""

    #: short machine-readable name used by the CLI error line
    code = "error"


class FieldMismatchError(SneedError, ValueError):
    code = "field-mismatch"


class FieldConstructionError(SneedError, ValueError):
    code = "invalid-field"


class FieldTooSmallError(SneedError, ValueError):
    code = "field-too-small"


class SingularMatrixError(SneedError, ArithmeticError):
    code = "singular-matrix"


class UnrecoverablePatternError(SneedError):
    """The surviving channels do not determine the message.

    ``capability_exceeded`` is set when more positions were erased than the
    code's guaranteed tolerance ``d - 1``.
    """

    code = "unrecoverable-pattern"

    def __init__(self, message, positions=(), capability_exceeded=False):
        super().__init__(message)
        self.positions = tuple(sorted(positions))
        self.capability_exceeded = capability_exceeded


class EnumerationTooLargeError(SneedError):
    code = "enumeration-too-large"


class SingletonViolationError(SneedError, ValueError):
    code = "singleton-violation"


class CatalogNotFoundError(SneedError, LookupError):
    code = "not-found"


class UnsupportedEntryError(SneedError):
    code = "unsupported-entry"


class MissingKeyError(SneedError, KeyError):
    code = "missing-key"


class MalformedPacketError(SneedError, ValueError):
    code = "malformed-packet"


class BadMagicError(MalformedPacketError):
    code = "bad-magic"


class UnknownVersionError(MalformedPacketError):
    code = "unknown-version"


class UnknownKindError(MalformedPacketError):
    code = "unknown-kind"


class TruncatedPacketError(MalformedPacketError):
    code = "truncated"


class LengthMismatchError(MalformedPacketError):
    code = "length-mismatch"


class ConfigError(SneedError, ValueError):
    code = "config"


class InsufficientShardsError(SneedError):
    code = "insufficient-shards"
