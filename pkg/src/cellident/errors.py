"""Exception types shared across the package."""


class CellIdentError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CellIdentError):
    """Invalid configuration file or CLI arguments (exit code 2)."""


class DataError(CellIdentError):
    """Missing or malformed data file (exit code 3)."""


class NonPositiveStep(CellIdentError, ValueError):
    """Sample period must be strictly positive."""


class StepTooCoarse(CellIdentError, ValueError):
    """Sample period exceeds a tenth of the fastest block time constant,
    so the discretization would be inaccurate."""


class ConcentrationOutOfRange(CellIdentError):
    """A surface concentration left the open interval (0, c_max)."""

    def __init__(self, message, electrode=None, index=None):
        super().__init__(message)
        self.electrode = electrode
        self.index = index


class SimulationDiverged(CellIdentError):
    """A sub-model failed during simulation; carries the failing time index."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DimensionMismatch(CellIdentError, ValueError):
    """Parameter vector length does not match the search box dimension."""


class OutOfBox(CellIdentError, ValueError):
    """A physical parameter vector lies outside the search box."""


class SingularKernel(CellIdentError):
    """Kernel matrix factorization failed at every jitter level."""


class DuplicatePoint(CellIdentError, ValueError):
    """Two observed surrogate inputs coincide within tolerance."""


class NegativeVariance(CellIdentError, ValueError):
    """A predictive variance is negative beyond clamping tolerance."""


class SocWindowViolation(CellIdentError):
    """A generated current profile drives the reference cell outside the
    allowed state-of-charge window."""
