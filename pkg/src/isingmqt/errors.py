"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """A requested problem size exceeds a configured resource cap.

    The message always names the cap so callers can decide whether to
    raise it or pick a cheaper method.
    """


class ConvergenceError(RuntimeError):
    """An iterative eigensolve failed to reach the requested residual."""

    def __init__(self, message: str, *, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConfigError(ValueError):
    """Invalid user-facing configuration (CLI flags, config files, sweep plans)."""
