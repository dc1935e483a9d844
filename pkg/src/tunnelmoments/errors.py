"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """Incompatible combination of model, pulse, frame or state."""


class SingularityError(ArithmeticError):
    """A Coulomb-type potential was evaluated at its unsoftened singularity."""


class ConvergenceError(RuntimeError):
    """A minimizer or root finder failed to converge.

    ``diagnostics`` carries whatever the solver reported.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IntegrationError(RuntimeError):
    """The ODE integrator could not continue.

    Attributes
    ----------
    t : float
        Time of the last accepted state.
    y : ndarray
        Last accepted state vector.
    partial : Trajectory or None
        Everything integrated up to the failure.
    """

    def __init__(self, message, t=None, y=None, partial=None):
        super().__init__(message)
        self.t = t
        self.y = y
        self.partial = partial
