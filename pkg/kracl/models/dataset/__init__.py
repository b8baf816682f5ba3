from .dataset import (
    CategoryName,
    ContextGraph,
    Dataset,
    DatasetStats,
    RelationCategories,
    RelationCategory,
    Split,
    Triple,
)

__all__ = [
    "CategoryName",
    "ContextGraph",
    "Dataset",
    "DatasetStats",
    "RelationCategories",
    "RelationCategory",
    "Split",
    "Triple",
]
