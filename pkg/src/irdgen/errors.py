"""Exception types raised across the package."""


class IrdgenError(Exception):
    """Base class for all package errors."""


class NegativeMass(IrdgenError, ValueError):
    pass


class NotNormalized(IrdgenError, ValueError):
    pass


class InvalidAlpha(IrdgenError, ValueError):
    pass


class InfiniteMean(IrdgenError, ValueError):
    pass


class OrphanColour(IrdgenError, ValueError):
    """A colour with positive mass has no admissible vertex type."""


class EmptyAdmissibleSet(IrdgenError, RuntimeError):
    """A drawn arc colour has no admissible source or target in the realization."""


class MetricMismatch(IrdgenError, ValueError):
    pass


class ConfigError(IrdgenError, ValueError):
    """Invalid configuration; ``key_path`` names the offending entry."""

    def __init__(self, key_path, message):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class NoConvergence(IrdgenError, RuntimeError):
    """Fixed-point iteration hit ``max_iter``; ``best`` holds the last iterate."""

    def __init__(self, message, best=None, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations
