"""Exception types shared across the library."""

from __future__ import annotations


class GabtorError(Exception):
    """Base class for all library errors."""


class ParameterError(GabtorError, ValueError):
    """Invalid argument value (unsupported kind, bad theta, divisibility failure)."""


class GridMismatchError(GabtorError, ValueError):
    """Operands live on different grids."""


class SizeError(GabtorError, ValueError):
    """Requested grid exceeds the configured sample limit."""


class ConvergenceError(GabtorError, RuntimeError):
    """An iterative solver hit its iteration cap.

    Carries the last iterate and residual so callers can inspect how far
    the solve got.
    """

    def __init__(self, message: str, last_iterate=None, residual: float | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class PreconditionError(GabtorError, ValueError):
    """A documented operation precondition was violated."""


class NotAFrameError(PreconditionError):
    """Lower frame bound below the positivity threshold; carries measured bounds."""

    def __init__(self, message: str, lower: float, upper: float):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class NotTightError(PreconditionError):
    """Frame bounds not equal within tolerance; carries measured bounds."""

    def __init__(self, message: str, lower: float, upper: float):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class NotBiorthogonalError(PreconditionError):
    """Window pair failed the biorthogonality certificate; carries the defect."""

    def __init__(self, message: str, defect: float):
        super().__init__(message)
        self.defect = defect
