"""Exception hierarchy shared by all joulecast modules."""


class JoulecastError(Exception):
    """Base class for every error raised by this package."""


class TraceCSVError(JoulecastError):
    """Malformed trace CSV. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientDataError(JoulecastError):
    """Too few samples for the requested operation."""


class TimestampOrderError(JoulecastError):
    """Timestamps are not strictly increasing."""


class NonUniformSamplingError(JoulecastError):
    """Sampling gaps deviate too much for a fixed-step representation."""


class TraceRangeError(JoulecastError):
    """Requested interval lies outside the trace."""


class LabelingError(JoulecastError):
    """Segment and label counts disagree."""

    def __init__(self, n_segments: int, n_labels: int):
        self.n_segments = n_segments
        self.n_labels = n_labels
        super().__init__(
            f"cannot label {n_segments} segments with {n_labels} labels"
        )


class DomainError(JoulecastError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class UnderdeterminedError(JoulecastError):
    """Fewer observations than model parameters."""


class IllConditionedError(JoulecastError):
    """Design matrix numerically singular; a smaller degree may help."""


class NumericalError(JoulecastError):
    """Factorization or other numerical step failed."""


class IncompleteModelError(JoulecastError):
    """A required fitted model is missing from the model set."""


class ResolutionError(JoulecastError):
    """Sample rate too low to resolve a schedule phase."""


class ConfigError(JoulecastError):
    """Invalid or incomplete configuration input."""
