"""Exception types shared across the library."""


class CBPTError(Exception):
    """Base class for all library errors."""


class ValidationError(CBPTError, ValueError):
    """Invalid argument values, shapes, or violated data invariants."""


class ParseError(CBPTError, ValueError):
    """A CSV cell failed to parse as a finite number.

    Attributes
    ----------
    row : int
        1-based line number in the file (the header is line 1).
    column : str
        Name of the offending column.
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class SchemaError(CBPTError, ValueError):
    """Structural problem: missing label column, empty file, or an
    incompatible model-document format version."""


class WeakLearnerError(CBPTError):
    """Raised when an estimator's weighted error is no better than chance
    and it must be discarded by the caller."""


class TrainingError(CBPTError):
    """Training could not produce a usable model."""
