"""Exception types shared across the package."""


class TsbossError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(TsbossError, ValueError):
    """An argument violates a documented precondition."""


class InsufficientDataError(TsbossError, ValueError):
    """Too few rows / time points for the requested operation."""


class ParseError(TsbossError, ValueError):
    """A cell of an input file could not be parsed as a finite number."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class FormatError(TsbossError, ValueError):
    """An input file is structurally malformed (e.g. ragged rows)."""


class GenerationFailureError(TsbossError, RuntimeError):
    """The model sampler exhausted its rejection budget."""


class InvalidModelError(TsbossError, ValueError):
    """A structural model violates its own invariants."""


class SizeCapError(TsbossError, ValueError):
    """An exhaustive routine was invoked above its hard size cap."""


class InternalConsistencyError(TsbossError, RuntimeError):
    """An internal invariant was violated; indicates invalid input or a bug."""


class RunFailureError(TsbossError, RuntimeError):
    """Too many replicate failures inside an experiment run."""
