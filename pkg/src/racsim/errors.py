"""Exception hierarchy shared by all racsim modules."""


class RacsimError(Exception):
    """Base class for every error raised by racsim."""


class DomainError(RacsimError, ValueError):
    """An argument lies outside the domain of a function."""


class OutOfRangeError(RacsimError, ValueError):
    """Pseudo-inverse requested beyond the total mass of a finite measure."""


class BracketError(RacsimError, ValueError):
    """Root bracket does not enclose the target; expand it and retry."""

    def __init__(self, message, lo=None, hi=None):
        super().__init__(message)
        self.lo = lo
        self.hi = hi


class NumericError(RacsimError, ArithmeticError):
    """Numerical procedure failed (quadrature, finite differences)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UnsupportedMeasureError(RacsimError, TypeError):
    """Operation needs a capability the measure does not provide."""


class CapacityError(RacsimError, ValueError):
    """Exact evaluation too expensive for the requested size."""


class ConfigError(RacsimError, ValueError):
    """Invalid configuration; ``key`` names the offending field."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class IterationCapError(RacsimError, RuntimeError):
    """Sampler exceeded its safety cap on while-loop iterations."""


class PartialResultError(RacsimError, RuntimeError):
    """Batch sampling stopped early; ``completed`` rows form a valid prefix."""

    def __init__(self, message, completed, cause=None):
        super().__init__(message)
        self.completed = completed
        self.cause = cause
