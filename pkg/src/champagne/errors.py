"""Exception types shared across the package."""

from __future__ import annotations


class ChampagneError(Exception):
    """Base class for all package errors."""


class ScheduleError(ChampagneError, ValueError):
    """A schedule violates one of the construction constraints."""


class DomainError(ChampagneError, ValueError):
    """An argument lies outside the domain of a function."""


class UnderflowRadius(ChampagneError, ArithmeticError):
    def __init__(self, log_radius: float, k: int | None = None):
        self.log_radius = log_radius
        self.k = k
        where = f" at shell k={k}" if k is not None else ""
        super().__init__(f"bubble radius exp({log_radius:.6g}) underflows to 0{where}")


class HorizonExceeded(ChampagneError, RuntimeError):
    """A scan ran past its configured horizon without finding an answer."""


class NetTooLarge(ChampagneError, MemoryError):
    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(f"net needs {required} points, cap is {cap}")


class DisjointnessViolation(ChampagneError, AssertionError):
    """Two closed bubbles intersect. Indicates a construction bug."""


class Infeasible(ChampagneError, ValueError):
    """No parameter choice within the horizon satisfies the requested bounds."""


class InsideObstacle(ChampagneError, ValueError):
    """A query point lies in a closed bubble."""


class FlaggedTimeouts(ChampagneError, RuntimeError):
    def __init__(self, estimate, cap: float):
        self.estimate = estimate
        self.cap = cap
        frac = estimate.timeouts / max(estimate.trials, 1)
        super().__init__(
            f"{estimate.timeouts}/{estimate.trials} walks timed out "
            f"({frac:.2e} > cap {cap:.1e})"
        )
