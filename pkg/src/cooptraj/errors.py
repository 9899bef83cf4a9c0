"""Exception types shared across the package."""


class CoopTrajError(Exception):
    """Base class for all package-specific errors."""


class CompatibilityError(CoopTrajError, ValueError):
    """Raised when a pointwise operation receives trajectories with
    differing sample counts or sample spacing."""


class SimulationDiverged(CoopTrajError, RuntimeError):
    """Raised when the plant state becomes non-finite during execution."""

    def __init__(self, tick: int, message: str = ""):
        self.tick = tick
        super().__init__(message or f"plant state became non-finite at tick {tick}")
