"""Exception types raised across the package."""


class RollsingError(Exception):
    """Base class for all package errors."""


class ConfigError(RollsingError, ValueError):
    """Invalid parameters or configuration."""


class AssumptionViolated(ConfigError):
    """Wave parameters break a modelling assumption (e.g. n <= 2 with a > 0)."""


class InvalidSpec(ConfigError):
    """Rest-to-rest profile with a non-positive duration."""


class DegenerateInertia(RollsingError):
    """Inertia matrix determinant collapsed; parameters are corrupt."""


class NoFeasibleAmplitude(RollsingError):
    """Amplitude search bracket contains no feasible wave amplitude."""


class SingularityHit(RollsingError):
    """Coupling inertia M12 reached the singular guard band or changed sign.

    Attributes:
        t: simulation time of the event, or None when evaluated outside a run
        zeta: rotor world angle gamma + theta at the event
        M12: coupling inertia at the event
        partial: partially filled trace, attached by the simulation engine
    """

    def __init__(self, message, t=None, zeta=None, M12=None):
        super().__init__(message)
        self.t = t
        self.zeta = zeta
        self.M12 = M12
        self.partial = None


class IntegratorError(RollsingError):
    """Base class for adaptive integrator failures."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
        self.partial = None


class StepUnderflow(IntegratorError):
    """Step size dropped below h_min."""


class BudgetExceeded(IntegratorError):
    """Step budget max_steps exhausted before reaching the end time."""


class RhsFailure(IntegratorError):
    """Right-hand side returned non-finite values."""
