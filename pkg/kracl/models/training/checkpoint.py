from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import Field

from ..base import ArrayModel
from .config import TrainConfig

CHECKPOINT_VERSION = 1


class Checkpoint(ArrayModel):
    format_version: int = CHECKPOINT_VERSION
    config: TrainConfig
    parameters: Dict[str, np.ndarray]
    optimizer_moments: Dict[str, np.ndarray] = Field(default_factory=dict)
    optimizer_step: int = 0
    epoch: int = 0
    seed_state: Dict[str, Any] = Field(default_factory=dict)
    best_valid_mrr: Optional[float] = None
    loss_history: List[float] = Field(default_factory=list)
    entity_names: List[str] = Field(default_factory=list)
    relation_names: List[str] = Field(default_factory=list)
