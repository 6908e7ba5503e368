"""Exception hierarchy.

Every failure raised by the library derives from :class:`DiurnalError`.  The
three intermediate classes decide the CLI exit code: usage problems (1),
bad or unusable input data (2), and analyses that ran but found nothing
periodic (3).
"""


class DiurnalError(Exception):
    """Base class for all library errors."""

    code = "error"


class UsageError(DiurnalError, ValueError):
    code = "usage"


class DataError(DiurnalError, ValueError):
    code = "data"


class NoResultError(DiurnalError):
    code = "no_result"


# grid_io
class NoFrames(DataError):
    code = "no_frames"


class DimensionMismatch(DataError):
    code = "dimension_mismatch"


class BadTimestamp(DataError):
    code = "bad_timestamp"


class ParseError(DataError):
    code = "parse_error"

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class AllMissing(DataError):
    code = "all_missing"


class Unresolvable(DataError):
    code = "unresolvable"


class BadCropSize(DataError):
    code = "bad_crop_size"


# morphology
class KernelTooLarge(UsageError):
    code = "kernel_too_large"


class AllForeground(DataError):
    code = "all_foreground"


# spectral
class TooFewSamples(DataError):
    code = "too_few_samples"


class OutOfRange(DataError):
    code = "out_of_range"


class NoCompleteDays(NoResultError):
    code = "no_complete_days"


class NoSignal(NoResultError):
    code = "no_signal"


class NonPositiveFrequency(UsageError):
    code = "non_positive_frequency"


class BinNotFound(UsageError):
    code = "bin_not_found"


# pipeline / synth
class NoPairs(DataError):
    code = "no_pairs"


class BadParams(UsageError):
    code = "bad_params"
