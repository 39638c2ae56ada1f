"""Exception hierarchy shared by the solver modules and the CLI."""


class BurgersError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(BurgersError, ValueError):
    """Malformed problem, grid, or scheme parameters."""


class InadmissibleError(BurgersError):
    """Boundary/far-field data outside the stationary-wave regime."""


class PreconditionError(BurgersError):
    """An operation was called outside the hypotheses it is valid under."""


class DivergenceError(BurgersError):
    """Stationary trajectory left the basin of the stable far-field state."""


class FarFieldError(BurgersError):
    """Truncated stationary solution has not settled onto its far-field tail."""

    def __init__(self, message, wave=None):
        super().__init__(message)
        self.wave = wave


class DegenerateTail(BurgersError):
    """Far-field deviation is below round-off so no decay exponent exists."""


class PositivityError(BurgersError):
    """A constructed weight function failed to stay strictly positive."""


class CflCollapse(BurgersError):
    """Adaptive time-step halving went below the allowed floor."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NonFinite(BurgersError):
    """NaN or Inf appeared in the evolving solution."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class OverflowGuard(BurgersError):
    """Exponential weight cannot be represented on the requested domain."""


class InsufficientWindow(BurgersError):
    """Too few samples inside a rate-fitting window."""


class CurvatureRejected(BurgersError):
    """Log-log series is too curved to be a power law."""

    def __init__(self, message, curvature):
        super().__init__(message)
        self.curvature = curvature


class ConfigError(BurgersError):
    """Run configuration could not be parsed or validated."""
