"""Exception hierarchy shared by every module.

Each class carries the exit code the command-line front end maps it to.
"""


class QsdError(Exception):
    exit_code = 3


class ParameterError(QsdError, ValueError):
    """Invalid user-supplied parameter; ``field`` names the offending one."""

    exit_code = 2

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(QsdError, ValueError):
    """Argument outside the region where a function is defined or evaluated."""

    exit_code = 2


class InvalidThetaError(DomainError):
    """Raised when the balance recurrence turns negative, i.e. theta exceeds theta*."""

    def __init__(self, theta, index, value):
        super().__init__(
            f"nu({index}) = {value:.3e} < 0 for theta = {theta!r}; theta exceeds the survival rate theta*"
        )
        self.theta = theta
        self.index = index


class ConvergenceError(QsdError, ArithmeticError):
    """A series, quadrature or recurrence did not reach the requested accuracy."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SolverError(QsdError, ArithmeticError):
    pass


class RunawayError(QsdError, RuntimeError):
    def __init__(self, trajectory, max_events):
        super().__init__(f"trajectory {trajectory} exceeded max_events={max_events}")
        self.trajectory = trajectory


class StatisticsError(QsdError, ValueError):
    exit_code = 4


class NearSingularityError(DomainError):
    """Point too close to a pole for the closed form to keep any precision."""
