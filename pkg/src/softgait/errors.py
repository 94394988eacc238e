"""Exception types shared across the workbench."""


class SoftgaitError(Exception):
    """Base class for all workbench errors."""


class ConfigError(SoftgaitError):
    """Invalid configuration value; message names the offending field."""


class ValidationError(SoftgaitError):
    """Domain object violates its invariants (bad genotype, bad spring, ...)."""


class BuildError(SoftgaitError):
    """Robot construction failed (e.g. spawn collides with the terrain)."""


class OutOfExtentError(SoftgaitError):
    """Height query outside the terrain profile; the profile is too short."""


class UnstableSimulationError(SoftgaitError):
    """Simulation state became non-finite."""

    def __init__(self, time: float, message: str | None = None):
        self.time = time
        super().__init__(message or f"simulation became non-finite at t={time:.6f}s")


class OptimizerDegenerateError(SoftgaitError):
    """Optimizer internal state is unusable (e.g. covariance decomposition failed)."""


class ProtocolError(SoftgaitError):
    """Ask/tell protocol misuse, e.g. batch size mismatch."""
