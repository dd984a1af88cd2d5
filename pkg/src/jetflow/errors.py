"""Exception hierarchy shared by all jetflow modules."""


class JetflowError(Exception):
    """Base class for every error raised by jetflow."""


class ExpressionSyntaxError(JetflowError):
    """Malformed expression text. ``position`` is a 0-based character offset."""

    def __init__(self, message, position=None):
        self.message = message
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"{message}{where}")


class DimensionError(JetflowError):
    """A variable index exceeds the declared dimension, or shapes disagree."""

    def __init__(self, message, position=None):
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"{message}{where}")


class DomainError(JetflowError):
    """Evaluation left the domain of an operation (log of a non-positive, 1/0, ...)."""

    def __init__(self, message, position=None):
        self.message = message
        self.position = position
        super().__init__(message)

    def __str__(self):
        if self.position is None:
            return self.message
        return f"{self.message} (node at position {self.position})"


class SingularChangeError(JetflowError):
    """A coordinate change has a (numerically) vanishing Jacobian."""


class InconsistentChangeError(JetflowError):
    """The supplied inverse of a coordinate change does not invert the forward map."""


class MetricDegenerateError(JetflowError):
    """A metric is non-positive, non-symmetric or too ill-conditioned to invert."""


class DegenerateLagrangianError(JetflowError):
    """The velocity Hessian of a Lagrangian is singular or too ill-conditioned."""


class MissingDerivativeError(JetflowError):
    """A callback field was given without the derivative data an operation needs."""


class StepFailure(JetflowError):
    """The adaptive integrator could not take a step larger than the minimum."""


class NonFiniteState(JetflowError):
    """The integrated state became infinite or NaN."""


class QuadratureError(JetflowError):
    """Not enough samples for the requested quadrature."""


class ScenarioError(JetflowError):
    """A scenario document is missing fields or has invalid values."""
