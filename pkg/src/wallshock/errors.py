class WallShockError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(WallShockError, ValueError):
    pass


class DomainError(WallShockError, ValueError):
    pass


class NumericalError(WallShockError, RuntimeError):
    pass


class ProfileRefinementError(NumericalError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class InsufficientTailError(NumericalError):
    pass


class BlowUpError(NumericalError):
    def __init__(self, message: str, t: float, index: int | None = None):
        super().__init__(message)
        self.t = t
        self.index = index


class IncompleteRecordError(WallShockError):
    pass


class MissingArtifactsError(WallShockError):
    pass


class TruncationWarning(UserWarning):
    """An integrand has not decayed at the edge of the truncated domain."""
