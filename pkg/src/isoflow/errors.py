"""Exception hierarchy shared by the whole package."""


class IsoflowError(Exception):
    """Base class for all errors raised by isoflow."""


class DimensionError(IsoflowError, ValueError):
    """Operands have incompatible shapes."""


class NonFiniteError(IsoflowError, ValueError):
    """A matrix contains NaN or Inf entries."""


class SingularMatrixError(IsoflowError, ArithmeticError):
    """A linear solve hit a pivot below the singularity threshold."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class MembershipError(IsoflowError, ValueError):
    """A matrix violates a Lie algebra or Lie group membership residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(IsoflowError, RuntimeError):
    """An iterative procedure failed to converge."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DivergenceError(ConvergenceError):
    """The fixed-point residual kept growing."""


class StepError(IsoflowError):
    """Wraps an error raised while taking a particular integration step."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


class ConfigError(IsoflowError, ValueError):
    """Invalid benchmark configuration."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
