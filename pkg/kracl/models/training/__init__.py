from .checkpoint import CHECKPOINT_VERSION, Checkpoint
from .config import DATASET_PRESETS, TieMode, TrainConfig
from .parameters import ModelParameters
from .sweep import SweepKind, SweepResult, SweepRun

__all__ = [
    "CHECKPOINT_VERSION",
    "Checkpoint",
    "DATASET_PRESETS",
    "ModelParameters",
    "SweepKind",
    "SweepResult",
    "SweepRun",
    "TieMode",
    "TrainConfig",
]
