"""Exception hierarchy.

Every error raised on purpose by the package derives from ``CorrdepError``.
The CLI maps ``DataError`` to exit code 3 and ``NumericalError`` to exit
code 4; anything deriving from ``UsageError`` exits with 2.
"""


class CorrdepError(Exception):
    category = "Error"


class UsageError(CorrdepError, ValueError):
    category = "UsageError"


class DataError(CorrdepError, ValueError):
    category = "DataError"


class NumericalError(CorrdepError, ArithmeticError):
    category = "NumericalError"


# audio_io
class MalformedHeader(DataError):
    pass


class UnsupportedEncoding(DataError):
    pass


class EmptyAudio(DataError):
    pass


class RateTooLow(DataError):
    pass


class SpeakerFoldViolation(DataError):
    pass


class UnknownLabel(DataError):
    pass


class MissingAudio(DataError):
    pass


class InvalidManifest(DataError):
    pass


# features / representations
class TooShort(DataError):
    pass


class SequenceTooShort(DataError):
    pass


class OddL(DataError):
    pass


class MalformedCache(DataError):
    pass


# models
class SingleClass(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptySequence(DataError):
    pass


class EmptyVote(DataError):
    pass


class DivergenceDetected(NumericalError):
    pass


# evaluation / statistics
class LengthMismatch(DataError):
    pass


class InvalidPriors(DataError):
    pass


class PerfectBaseline(DataError):
    pass


class FoldEmpty(DataError):
    pass


class TooFewMatrices(DataError):
    pass


class EmptyGroup(DataError):
    pass


class InvalidParams(DataError):
    pass
