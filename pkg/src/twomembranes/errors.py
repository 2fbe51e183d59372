"""Exception types shared across the package.

Solvers report non-convergence through their reports, never through
exceptions; the classes here cover genuinely invalid inputs plus the one
case (inner solve failure inside the membrane iteration) where a partial
result has to be carried along with the error.
"""


class InvalidResolution(ValueError):
    """Grid resolution below the 3-nodes-per-axis minimum."""


class SamplingError(ValueError):
    """Expression evaluation produced a non-finite value at some node."""


class GridMismatch(ValueError):
    """Fields living on different grids were combined."""


class ExpressionError(ValueError):
    """Malformed expression text."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class InfeasibleProblem(ValueError):
    """Obstacle and boundary data incompatible at a boundary node."""


class RejectedSeed(ValueError):
    """Iteration seed fails its classification or boundary precondition."""


class DemoFailed(RuntimeError):
    """Built-in nonuniqueness demo failed one of its own audits."""


class InnerSolveFailed(RuntimeError):
    """An obstacle solve inside the membrane iteration did not converge.

    Carries the outer step index and whatever trace was accumulated so the
    caller can still dump partial artifacts.
    """

    def __init__(self, step: int, which: str, trace=None):
        self.step = step
        self.which = which
        self.trace = trace
        super().__init__(f"inner {which}-solve did not converge at outer step {step}")


class ConfigError(ValueError):
    """Config file rejected; message carries section/key context."""
