"""Exception hierarchy shared by all numerical modules."""


class SingreenError(Exception):
    """Base class for every error raised by the package."""


class DomainError(SingreenError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class UnsupportedClassError(SingreenError, ValueError):
    """Potential parameters fall outside the supported singularity class."""


class AccuracyError(SingreenError, ArithmeticError):
    """An evaluation scheme failed to reach its accuracy target.

    Raised instead of returning a value of unknown quality.
    """


class PoleError(DomainError):
    """Input sits on a pole of the evaluated function."""


class SingularConfigurationError(SingreenError, ArithmeticError):
    """A denominator that defines the result vanishes (resonance)."""


class IllConditionedError(SingreenError, ArithmeticError):
    """A least-squares design matrix is rank deficient or numerically collinear."""


class IntegrationError(SingreenError, ArithmeticError):
    """The ODE integrator failed; ``radius`` records where."""

    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius
