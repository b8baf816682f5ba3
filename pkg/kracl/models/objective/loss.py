from typing import Dict, List

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ...core.errors import InvariantViolation
from ..base import ArrayModel


class LossConfig(BaseModel):
    temperature: float = Field(0.1, gt=0)
    use_cl: bool = True
    use_ce: bool = True
    bce_mode: bool = False
    label_smoothing: float = Field(0.0, ge=0, lt=1)
    epsilon: float = 1e-12

    @model_validator(mode="after")
    def _some_term_enabled(self) -> "LossConfig":
        if not (self.use_cl or self.use_ce or self.bce_mode):
            raise ValueError("at least one of use_cl / use_ce must be set unless bce_mode")
        return self


class Batch(ArrayModel):
    """
    (subject, relation) queries drawn from augmented training triples.

    ``positive_grouping`` maps each gold object to the batch rows predicting it.
    """
    queries: np.ndarray  # B×2
    gold_objects: np.ndarray  # B
    multi_label_targets: List[np.ndarray]
    positive_grouping: Dict[int, np.ndarray]

    @property
    def size(self) -> int:
        return int(self.gold_objects.shape[0])

    def check(self) -> None:
        for i, (gold, targets) in enumerate(zip(self.gold_objects, self.multi_label_targets)):
            if targets.size == 0:
                raise InvariantViolation(f"query {i} has an empty target set")
            if gold not in targets:
                raise InvariantViolation(f"gold object {gold} of query {i} is missing from its targets")
        covered = np.sort(np.concatenate(list(self.positive_grouping.values()))) if self.positive_grouping else []
        if not np.array_equal(covered, np.arange(self.size)):
            raise InvariantViolation("positive grouping does not partition the batch")
