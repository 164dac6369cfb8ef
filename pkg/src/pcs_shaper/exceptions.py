"""Exception types shared across the package."""


class PcsShaperError(Exception):
    """Base class for all package errors."""


class ConfigError(PcsShaperError):
    """Invalid or inconsistent configuration input."""


class InfeasibleError(PcsShaperError):
    """The constraint set admits no feasible point."""


class NonConvergenceError(PcsShaperError):
    """An iterative numerical procedure failed to reach its tolerance."""


class DegradedRegimeError(PcsShaperError):
    """Eavesdropper channel is not a degraded version of the legitimate one."""
