from .params import (
    OPERATOR_ORDER,
    EmbeddingTables,
    KratLayerParams,
    Operator,
    canonical_operators,
)

__all__ = ["OPERATOR_ORDER", "EmbeddingTables", "KratLayerParams", "Operator", "canonical_operators"]
