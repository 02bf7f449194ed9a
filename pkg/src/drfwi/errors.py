"""Exception types shared across the package."""


class DrfwiError(Exception):
    """Base class for all package errors."""


class ModelError(DrfwiError):
    """Velocity model data is malformed (shape, finiteness, positivity)."""


class GeometryError(DrfwiError):
    """Acquisition geometry is inconsistent with the model grid."""


class ConfigurationError(DrfwiError):
    """A run configuration is invalid (bad keys, CFL violation, bad sizes)."""


class SimulationError(DrfwiError):
    """Time stepping failed. Carries the step index where it happened."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class TrainingError(DrfwiError):
    """Training aborted (non-finite loss or gradient, or a simulation failure).

    Carries the epoch index where the failure happened when known.
    """

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class MetricsError(DrfwiError):
    """A diagnostic quantity is undefined for the given inputs."""


class CheckpointError(DrfwiError):
    """A network checkpoint file does not match its header."""
