"""Exception types shared across the package."""


class SeedmineError(Exception):
    """Base class for all package errors."""


class FormatError(SeedmineError):
    """A file does not conform to its on-disk format."""


class ShapeError(SeedmineError):
    """Array dimensions disagree with what an operation requires."""


class ParameterError(SeedmineError):
    """An argument violates an operation's precondition."""


class ContractError(SeedmineError):
    """A caller-supplied combination of inputs breaks a stated contract."""


class DivergenceError(SeedmineError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, loss):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")
        self.epoch = epoch


class MetricError(SeedmineError):
    """A metric is undefined for the given inputs."""
