"""Exception hierarchy.

Class names double as the machine-parsable error tag printed by the CLI,
so they are kept short and stable.
"""


class VibtextError(Exception):
    """Base class for every error raised by this package."""


# signal files
class MatFileError(VibtextError, ValueError):
    pass


class BadMagic(MatFileError):
    pass


class UnsupportedElement(MatFileError):
    pass


class TruncatedFile(MatFileError):
    pass


class ChecksumOrInflateFailure(MatFileError):
    pass


class NoMatchingChannel(VibtextError, LookupError):
    pass


class AmbiguousChannel(VibtextError, LookupError):
    pass


class InvalidSignal(VibtextError, ValueError):
    pass


class InvalidSpec(VibtextError, ValueError):
    pass


# preprocessing
class SignalTooShort(VibtextError, ValueError):
    pass


class TooManySegments(VibtextError, ValueError):
    pass


class NonFiniteInput(VibtextError, ValueError):
    pass


class SegmentTooShort(VibtextError, ValueError):
    pass


class EmptyInput(VibtextError, ValueError):
    pass


# corpora
class TrackMismatch(VibtextError, TypeError):
    pass


class MissingSizeForTenScheme(VibtextError, ValueError):
    pass


class MissingClass(VibtextError, ValueError):
    pass


class MixedCondition(VibtextError, ValueError):
    pass


class DuplicateClass(VibtextError, ValueError):
    pass


class IoError(VibtextError, OSError):
    pass


class MalformedLine(VibtextError, ValueError):
    def __init__(self, lineno, reason):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno


class MissingSubset(VibtextError, LookupError):
    pass


class InvalidPlan(VibtextError, ValueError):
    pass


class UnknownRecord(VibtextError, LookupError):
    pass


class ConfigError(VibtextError, ValueError):
    pass


# classifiers
class EmptyClass(VibtextError, ValueError):
    pass


class DimensionMismatch(VibtextError, ValueError):
    pass


class InvalidParameter(VibtextError, ValueError):
    pass


# inference
class InferenceError(VibtextError):
    pass


class Transport(InferenceError):
    pass


class HttpStatus(InferenceError):
    def __init__(self, code, body=""):
        super().__init__(f"HTTP {code}: {body[:200]}")
        self.code = code


class MalformedResponse(InferenceError):
    pass
