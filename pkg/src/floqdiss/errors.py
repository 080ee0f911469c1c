"""Exception types raised across the package."""


class FloqdissError(Exception):
    """Base class for all package errors."""


class DimensionError(FloqdissError, ValueError):
    """Operators with incompatible shapes were combined."""


class InvalidOperatorError(FloqdissError, ValueError):
    """An operator violates its role invariant (finite, Hermitian, density matrix)."""


class SecularTermError(FloqdissError, ValueError):
    """A zero-frequency harmonic was passed to an antiderivative."""


class InsufficientBufferError(FloqdissError, ValueError):
    """A time series does not cover the filter support around the requested window."""


class PairOverlapError(FloqdissError, ValueError):
    """Two jump-operator carrier pairs are closer than the coarse-graining cutoff."""


class StructureError(FloqdissError, ValueError):
    """A system does not have the operator structure a closed form requires."""


class NumericalAbort(FloqdissError, RuntimeError):
    """An integration left its accuracy envelope (unitarity, positivity, projection).

    ``partial`` holds whatever output was computed before the check failed.
    """

    def __init__(self, message: str, partial=None):
        self.partial = partial
        super().__init__(message)


class ScenarioError(FloqdissError, ValueError):
    """A scenario document is malformed; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ValidationFailure(FloqdissError):
    """A system failed a hard validity check; ``report`` lists the findings."""

    def __init__(self, report):
        self.report = report
        failed = "; ".join(f"{f.check}: {f.message}" for f in report.by_level("fail"))
        super().__init__(f"validity checks failed: {failed}")
