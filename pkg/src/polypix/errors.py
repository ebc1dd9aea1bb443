"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: argument errors exit 2,
format errors exit 3, training/numeric errors exit 4.
"""


class PolypixError(Exception):
    """Base class for all library errors."""


class ArgumentError(PolypixError):
    """A caller-supplied value violates a documented precondition."""


class DimensionError(ArgumentError):
    """Operand shapes or dtypes are incompatible; names the offending op."""


class KinkError(ArgumentError):
    """A gradient check was requested too close to the rectifier kink."""


class StateError(PolypixError):
    """An object was used after its single-shot lifecycle ended."""


class TapeConsumedError(StateError):
    """backward() was called on a tape that already ran its reverse sweep."""


class EvaluationError(PolypixError):
    """A function produced non-finite values during evaluation."""


class TrainingError(PolypixError):
    """Optimization diverged or received non-finite gradients."""


class FormatError(PolypixError):
    """A serialized artifact violates its container format."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class UnsupportedVersionError(FormatError):
    """Container version is not supported by this reader."""


class TruncatedFileError(FormatError):
    """File ended before the record being read was complete."""


class RecordMismatchError(FormatError):
    """A parameter record disagrees with the declared configuration."""
