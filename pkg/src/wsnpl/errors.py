"""Exception types shared across the package."""

from __future__ import annotations


class InfeasibleError(ValueError):
    """Distortion target at or below the achievable floor.

    Carries the floor so callers can report how far off the target is.
    """

    def __init__(self, message: str, floor: float):
        super().__init__(message)
        self.floor = floor


class NoEstimatorError(ValueError):
    """An estimate was requested from an all-zero allocation."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class ConsistencyError(RuntimeError):
    """An internal invariant failed (e.g. optimal cost above a baseline)."""


class ConfigError(ValueError):
    """Bad run configuration; names the offending key and line when known."""

    def __init__(self, message: str, key: str | None = None,
                 line: int | None = None):
        if key is not None and line is not None:
            message = f"{message} (key '{key}', line {line})"
        elif key is not None:
            message = f"{message} (key '{key}')"
        super().__init__(message)
        self.key = key
        self.line = line
