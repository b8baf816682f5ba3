from enum import Enum
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_serializer

from ..base import ArrayModel

NOT_AVAILABLE = "n/a"


class Direction(str, Enum):
    HEAD = "Head"
    TAIL = "Tail"


class MetricSummary(BaseModel):
    """Filtered ranking metrics; every value is None (serialized as "n/a") for an empty group."""
    count: int = 0
    mrr: Optional[float] = None
    mr: Optional[float] = None
    hits1: Optional[float] = None
    hits3: Optional[float] = None
    hits10: Optional[float] = None

    @field_serializer("mrr", "mr", "hits1", "hits3", "hits10")
    def _mark_missing(self, value: Optional[float]) -> Union[float, str]:
        return NOT_AVAILABLE if value is None else value

    @classmethod
    def from_ranks(cls, ranks: np.ndarray) -> "MetricSummary":
        ranks = np.asarray(ranks, dtype=np.float64)
        if ranks.size == 0:
            return cls()
        return cls(
            count=int(ranks.size),
            mrr=float(np.mean(1.0 / ranks)),
            mr=float(np.mean(ranks)),
            hits1=float(np.mean(ranks <= 1)),
            hits3=float(np.mean(ranks <= 3)),
            hits10=float(np.mean(ranks <= 10)),
        )


class BandRow(BaseModel):
    band: str
    lower: int
    upper: Optional[int] = None  # None for the open-ended last band
    metrics: MetricSummary


class CategoryRow(BaseModel):
    direction: Direction
    category: str
    metrics: MetricSummary


class EvalReport(MetricSummary):
    """
    Filtered link-prediction results for one split.

    ``queries`` holds one (subject, relation, gold object) row per ranked
    query; relation ids at or above ``num_relations`` are head predictions
    made through the inverse relation.
    """
    model_config = ArrayModel.model_config

    split: str
    num_entities: int
    num_relations: int
    queries: np.ndarray = Field(repr=False)
    ranks: np.ndarray = Field(repr=False)
    head: MetricSummary = Field(default_factory=MetricSummary)
    tail: MetricSummary = Field(default_factory=MetricSummary)
    by_indegree: List[BandRow] = Field(default_factory=list)
    by_relation_category: List[CategoryRow] = Field(default_factory=list)

    @field_serializer("queries", "ranks")
    def _as_lists(self, value: np.ndarray) -> list:
        return value.tolist()

    def tail_mask(self) -> np.ndarray:
        return self.queries[:, 1] < self.num_relations
