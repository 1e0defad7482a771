"""Exception hierarchy shared by the library and the CLI."""


class OrbitMatchError(Exception):
    """Base class for all library errors."""


class DomainError(OrbitMatchError, ValueError):
    """An input lies outside the domain of the operation."""


class ConfigError(OrbitMatchError, ValueError):
    """Unknown ids or inconsistent configuration values."""


class EstimationError(OrbitMatchError, RuntimeError):
    """A statistical estimate could not be formed from the data."""


class InsufficientScalesError(EstimationError):
    def __init__(self, usable):
        self.usable = usable
        super().__init__(
            f"insufficient resolved scales: {usable} usable radii, need >= 2")


class PlotError(OrbitMatchError):
    """A curve cannot be drawn (e.g. fewer than two points)."""
