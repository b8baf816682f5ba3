from enum import Enum
from typing import Dict, List, NamedTuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from ..base import ArrayModel, int_array


class Triple(NamedTuple):
    subject: int
    relation: int
    object: int


class Split(str, Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"


class Dataset(ArrayModel):
    """
    A benchmark knowledge graph with dense integer ids.

    Each split is an ``n×3`` int64 array of (subject, relation, object) rows.
    """
    name: str = ""
    entity_names: List[str] = Field(default_factory=list)
    relation_names: List[str] = Field(default_factory=list)
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray

    @field_validator("train", "valid", "test", mode="before")
    @classmethod
    def _as_triples(cls, value):
        return int_array(value, columns=3)

    @property
    def num_entities(self) -> int:
        return len(self.entity_names)

    @property
    def num_relations(self) -> int:
        return len(self.relation_names)

    def split(self, split: Split) -> np.ndarray:
        return getattr(self, Split(split).value)

    def triples(self, split: Split) -> List[Triple]:
        return [Triple(*map(int, row)) for row in self.split(split)]

    def all_triples(self) -> np.ndarray:
        return np.concatenate([self.train, self.valid, self.test], axis=0)


class ContextGraph(ArrayModel):
    """
    Inverse-augmented training edges grouped by object entity.

    ``order`` lists edge indices sorted by object; ``offsets[e]:offsets[e+1]``
    delimits the incoming edges of entity ``e`` within ``order``.
    """
    num_entities: int
    num_relations: int
    subjects: np.ndarray
    relations: np.ndarray
    objects: np.ndarray
    order: np.ndarray
    offsets: np.ndarray

    @property
    def num_relations_augmented(self) -> int:
        return 2 * self.num_relations

    @property
    def num_edges(self) -> int:
        return int(self.objects.shape[0])

    def in_degree(self) -> np.ndarray:
        return np.diff(self.offsets)

    def incoming(self, entity: int) -> np.ndarray:
        return self.order[self.offsets[entity]:self.offsets[entity + 1]]


class DatasetStats(BaseModel):
    num_entities: int
    num_relations: int
    num_train: int
    num_valid: int
    num_test: int
    average_in_degree: float
    median_in_degree: float
    in_degrees: List[int] = Field(default_factory=list, repr=False)


class CategoryName(str, Enum):
    ONE_TO_ONE = "1-1"
    ONE_TO_MANY = "1-N"
    MANY_TO_ONE = "N-1"
    MANY_TO_MANY = "N-N"


class RelationCategory(BaseModel):
    category: CategoryName
    tphr: float
    hptr: float


RelationCategories = Dict[int, RelationCategory]
