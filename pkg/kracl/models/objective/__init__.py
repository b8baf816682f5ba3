from .loss import Batch, LossConfig

__all__ = ["Batch", "LossConfig"]
