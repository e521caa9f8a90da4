"""Exception types shared across the package."""


class DnfError(Exception):
    """Base class for all package errors."""


class ConfigError(DnfError, ValueError):
    """Invalid configuration: bad shapes, dangling references, out-of-range parameters."""


class IntegrationStabilityError(DnfError):
    """The requested Euler step is too large for the time constant."""


class FitError(DnfError):
    """A movement primitive could not be fitted to the demonstration."""


class NumericError(DnfError, FloatingPointError):
    """Non-finite parameters or results."""


class PoseError(DnfError, ValueError):
    """A waypoint or feature coordinate lies outside the workspace."""


class UndefinedAngleError(DnfError, ValueError):
    """Zero displacement has no direction."""


class UndefinedRatioError(DnfError, ZeroDivisionError):
    """Ratio with a zero denominator."""


class InvariantViolation(DnfError, AssertionError):
    """A run broke one of the architecture's runtime invariants."""


class OutputError(DnfError, OSError):
    """The output directory cannot be created or written."""
