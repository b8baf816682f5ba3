from .optimizer import AdamW
from .sweep import ABLATIONS, DEFAULT_ABLATIONS, SweepService
from .training_service import TrainingService, load_config, train

__all__ = ["ABLATIONS", "AdamW", "DEFAULT_ABLATIONS", "SweepService", "TrainingService", "load_config", "train"]
