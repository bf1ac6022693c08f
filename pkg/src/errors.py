"""Exception hierarchy shared by the solver, the simulator and the CLI."""
from typing import Optional


class SemigeostrophicError(Exception):
    """Base class for all domain errors raised by this package."""


class ConfigValidationError(SemigeostrophicError, ValueError):
    """Raised when a run configuration violates a domain invariant."""


class CapSaturationError(SemigeostrophicError, RuntimeError):
    """Raised when the free surface reaches the cap height H.

    This signals that H was chosen too small for the data: at optimal
    weights the surface stays strictly below the cap.
    """

    def __init__(self, max_height: float, cap_height: float, columns: int):
        self.max_height = max_height
        self.cap_height = cap_height
        self.columns = columns
        super().__init__(
            f"Free surface reached the cap: max h = {max_height!r} >= H = {cap_height!r} "
            f"on {columns} column(s); increase cap_height"
        )


class InfeasibleMarginalsError(SemigeostrophicError, ValueError):
    """Raised when a quantity is requested that needs vol_i close to nu_i."""


class EmptyCellError(SemigeostrophicError, RuntimeError):
    """Raised when a cell has zero volume where a centroid is required."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"Empty cell(s) at indices {self.indices}; centroid undefined")


class SolverToleranceError(SemigeostrophicError, ValueError):
    """Raised when the requested tolerance is below the quadrature noise floor."""


class SupportGrowthError(SemigeostrophicError, RuntimeError):
    """Raised when dual points leave the admissible horizontal radius."""


class ParticleAboveSurfaceError(SemigeostrophicError, ValueError):
    """Raised when a particle is not strictly inside the fluid region."""


class OracleLimitError(SemigeostrophicError, ValueError):
    """Raised when a brute-force oracle is asked for more than it can hold."""


class ToleranceBreach(SemigeostrophicError):
    """A measured quantity exceeded its admissible limit.

    The CLI maps this error to exit code 2.
    """

    def __init__(self, message: str, value: Optional[float] = None, limit: Optional[float] = None):
        self.value = value
        self.limit = limit
        super().__init__(message)


class SolverConvergenceError(SemigeostrophicError, RuntimeError):
    """Raised inside the time loop when a weight solve does not converge."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class RunStorageError(SemigeostrophicError, OSError):
    """Raised when a run directory file cannot be written or read back."""
