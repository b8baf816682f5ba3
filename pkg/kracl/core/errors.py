"""Exception hierarchy shared by every kracl layer."""
from typing import Optional


class KraclError(Exception):
    """Base class for all errors raised by kracl."""


class DimensionError(KraclError, ValueError):
    """Operand shapes are incompatible."""


class ShapeError(DimensionError):
    """A tensor does not have the required shape (e.g. a non-scalar loss)."""


class DomainError(KraclError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConfigError(KraclError, ValueError):
    """A configuration value is invalid or inconsistent."""


class SegmentIndexError(KraclError, IndexError):
    """A segment or entity index is out of range."""


class DatasetParseError(KraclError, ValueError):
    def __init__(self, path: str, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


class LossError(KraclError, ValueError):
    """A loss cannot be evaluated on the given batch."""


class InvariantViolation(KraclError, AssertionError):
    """A structural invariant of a domain object does not hold."""


class CheckpointError(KraclError):
    """A checkpoint file is malformed or was written by another format version."""


class TrainingDivergedError(KraclError, FloatingPointError):
    def __init__(self, epoch: int, batch: int, loss: Optional[float] = None):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"non-finite loss {loss} at epoch={epoch} batch={batch}")
