"""Exception types shared across the package."""

from __future__ import annotations


class TopologyError(ValueError):
    """A line references a bus outside the grid or connects a bus to itself."""


class DuplicateLineError(TopologyError):
    """Two lines connect the same unordered bus pair."""


class SingularLineError(ValueError):
    """A line with R = X = 0 has no finite admittance."""


class ConnectivityError(ValueError):
    """An operation would leave the grid split into disconnected islands."""


class SchemaError(ValueError):
    """An input table violates the expected CSV schema."""


class InconsistentStateError(ValueError):
    """An initial state violates the algebraic constraint rows."""


class ConvergenceError(RuntimeError):
    """Newton iteration failed to reach the requested tolerance."""

    def __init__(self, message: str, residual_norm: float, iterations: int):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class SingularJacobianError(RuntimeError):
    """The Newton linear system is exactly singular."""


class IntegrationError(RuntimeError):
    """A time step could not be completed; `time` reports where."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time
