"""Exception types shared across the package."""

from __future__ import annotations


class RailbeamError(Exception):
    """Base class for all railbeam errors."""


class ConfigError(RailbeamError):
    """Malformed or inconsistent run configuration."""


class NonPositiveCoefficient(RailbeamError):
    """A physical coefficient that must be strictly positive is not."""

    def __init__(self, name: str, value: float):
        self.name = name
        self.value = value
        super().__init__(f"coefficient {name!r} must be > 0, got {value}")


class NegativeDamping(RailbeamError):
    """Kelvin-Voigt coefficient below zero."""

    def __init__(self, value: float):
        self.value = value
        super().__init__(f"Kelvin-Voigt coefficient Cd must be >= 0, got {value}")


class TooFewElements(RailbeamError):
    """Mesh needs at least two elements."""


class BoundaryMismatch(RailbeamError):
    """Initial displacement does not vanish at the pinned ends."""


class NewtonDiverged(RailbeamError):
    """Newton iteration hit its iteration cap before converging."""

    def __init__(self, iterations: int, residual: float, t: float):
        self.iterations = iterations
        self.residual = residual
        self.t = t
        super().__init__(
            f"Newton did not converge at t={t:g}: "
            f"residual {residual:.3e} after {iterations} iterations"
        )


class NonFiniteState(RailbeamError):
    """NaN or overflow appeared during time stepping."""

    def __init__(self, t: float):
        self.t = t
        super().__init__(f"non-finite state at t={t:g}")


class InputClassMismatch(RailbeamError):
    """A check was asked to run on an input class outside its hypothesis."""


class InvalidMultiplier(RailbeamError):
    """Cross-term multiplier outside the range that keeps V nonnegative."""


class InfeasibleMultiplier(RailbeamError):
    """No feasible Young parameters exist for the requested multiplier."""


class NonlinearNotSupported(RailbeamError):
    """Closed-form modal solutions only exist for the linear problem."""


class DegenerateData(RailbeamError):
    """Convergence-order fit received non-positive errors or too few levels."""
