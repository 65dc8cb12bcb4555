"""Exception hierarchy shared by every merosin module."""


class MerosinError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(MerosinError, ValueError):
    """An input was outside the domain of the operation that received it."""


class NonConvergenceError(MerosinError, RuntimeError):
    """A solver ran out of iterations or could not bracket its root."""


class EvaluationError(NonConvergenceError):
    """A user-supplied function returned NaN during a solve."""


class OutputError(MerosinError, OSError):
    """Writing an artifact failed. The message always names the path."""

    def __init__(self, path, reason):
        super().__init__(f"cannot write {path}: {reason}")
        self.path = str(path)
