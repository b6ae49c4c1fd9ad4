class PagofError(Exception):
    """Base class for every error raised by the package."""


class DimensionError(PagofError, ValueError):
    pass


class InvalidSizeError(PagofError, ValueError):
    pass


class DegenerateSampleError(PagofError):
    pass


class DegeneratePairError(PagofError, ValueError):
    """Angle requested for a zero-norm vector."""


class UnsupportedFamilyError(PagofError, ValueError):
    pass


class InputFormatError(PagofError):
    pass


class ConfigError(PagofError):
    pass


class NumericalError(PagofError):
    pass


class BootstrapAbortError(NumericalError):
    """Two consecutive replicate failures."""

    def __init__(self, message, replicate=None, diagnostics=None):
        super().__init__(message)
        self.replicate = replicate
        self.diagnostics = diagnostics or {}


class RankDeficiencyWarning(UserWarning):
    pass


class ConvergenceWarning(UserWarning):
    pass


class SeparationWarning(UserWarning):
    pass


class ClampWarning(UserWarning):
    pass
