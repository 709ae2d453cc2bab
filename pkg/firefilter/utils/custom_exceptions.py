from typing import Optional


class FireFilterError(Exception):
    """Base class for errors that map to a CLI exit code."""

    exit_code = 3


class ConfigError(FireFilterError, ValueError):
    """Raised when a configuration field is missing or invalid."""

    exit_code = 2

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DataFormatError(FireFilterError, ValueError):
    """Raised when an input file (wind CSV, fronts JSON) is malformed."""

    exit_code = 2

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class GridMismatchError(FireFilterError, ValueError):
    """Raised when operands live on different grids."""


class NumericalError(FireFilterError):
    """Raised when the numerics cannot proceed."""


class CflViolationError(NumericalError, ValueError):
    """Raised when a step is requested with dt above the CFL limit."""

    def __init__(self, dt: float, dt_max: float):
        self.dt = dt
        self.dt_max = dt_max
        super().__init__(f"dt={dt:.6g} s exceeds the stable limit {dt_max:.6g} s")


class DomainTooSmallError(NumericalError):
    """Raised when a propagated front reaches the grid guard band."""

    def __init__(self, time: float, particle_index: Optional[int] = None):
        self.time = time
        self.particle_index = particle_index
        where = f" (particle {particle_index})" if particle_index is not None else ""
        super().__init__(f"domain too small: front reached the grid border at t={time:.3f} s{where}; use a larger grid")


class DegenerateFrontError(NumericalError, ValueError):
    """Raised when a field or geometry has no usable fire front."""


class FilterError(FireFilterError):
    """Raised when a filter cycle fails; wraps the underlying error."""

    def __init__(self, message: str, observation_index: Optional[int], cause: Exception):
        self.observation_index = observation_index
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        where = f"observation {observation_index}" if observation_index is not None else "forecast-only cycle"
        super().__init__(f"{where}: {message}")
