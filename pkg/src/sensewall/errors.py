"""Exception hierarchy."""


class SensewallError(Exception):
    pass


class DomainError(SensewallError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateDistributionError(DomainError):
    """The noise-uncertainty law is a point mass and has no density."""


class RuleMismatchError(DomainError):
    """A fusion rule was passed to an operation that does not handle it."""


class UnsupportedClosedFormError(SensewallError, NotImplementedError):
    """No closed form exists for the requested configuration."""


class ConvergenceError(SensewallError, ArithmeticError):
    """Adaptive quadrature hit its depth cap.

    ``estimate`` holds the partial result accumulated before giving up.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class ConfigError(SensewallError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
