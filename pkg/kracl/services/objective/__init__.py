from .losses import (
    ObjectiveService,
    bce_loss,
    contrastive_loss,
    cross_entropy_loss,
    make_batch,
    total_loss,
)

__all__ = ["ObjectiveService", "bce_loss", "contrastive_loss", "cross_entropy_loss", "make_batch", "total_loss"]
