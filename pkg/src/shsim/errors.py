"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid basis, model or run configuration.

    ``key`` names the offending configuration entry when there is one.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateInitialCondition(ValueError):
    """The projected initial datum vanishes and cannot be normalized."""


class IntegrationError(RuntimeError):
    """A trajectory left the finite (or bounded) regime during time stepping."""

    def __init__(self, message, step=None, time=None, trajectory=None):
        super().__init__(message)
        self.step = step
        self.time = time
        self.trajectory = trajectory
