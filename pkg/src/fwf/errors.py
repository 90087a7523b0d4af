"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: data problems (bad input, short
series, misaligned arrays) exit 2, numerical failures (divergence,
factorization breakdown) exit 3.
"""


class FwfError(Exception):
    """Base class for all toolkit errors."""


class DataError(FwfError):
    """Input data is unusable (exit code 2)."""


class InsufficientDataError(DataError):
    """Series or dataset too short for the requested operation."""


class AlignmentError(DataError):
    """Paired sequences have mismatched lengths or shapes."""


class InvalidFoldError(DataError):
    """Cross-validation fold specification cannot be satisfied."""


class InconsistentConfigError(DataError):
    """Combined objects were built with incompatible configurations."""


class DataFormatError(DataError):
    """A serialized file does not match its declared format."""


class NumericalError(FwfError):
    """Numerical failure (exit code 3)."""


class GenerationDivergedError(NumericalError):
    """ODE/DDE integration produced a non-finite state."""


class DegenerateMatrixError(NumericalError):
    """Matrix has no usable spectrum (e.g. max eigenvalue <= 0)."""


class DecompositionError(NumericalError):
    """A factorization or solve failed beyond recovery."""
