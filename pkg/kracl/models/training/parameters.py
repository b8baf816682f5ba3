from typing import Dict, Iterator, List, Tuple

import numpy as np

from ...core.errors import CheckpointError
from ...engine import Tensor
from ..base import ArrayModel
from ..encoder import EmbeddingTables, KratLayerParams
from ..scoring import HeadParams


class ModelParameters(ArrayModel):
    """Embedding tables, per-layer KRAT weights and projection-head weights."""
    tables: EmbeddingTables
    layers: List[KratLayerParams]
    head: HeadParams

    def named_tensors(self) -> Iterator[Tuple[str, Tensor]]:
        yield "entity_embeddings", self.tables.entity
        yield "relation_embeddings", self.tables.relation
        for index, layer in enumerate(self.layers):
            for name, tensor in layer.tensors():
                yield f"layers.{index}.{name}", tensor
        for name, tensor in self.head.tensors():
            yield f"head.{name}", tensor

    def state(self) -> Dict[str, np.ndarray]:
        return {name: tensor.values.copy() for name, tensor in self.named_tensors()}

    def load_state(self, state: Dict[str, np.ndarray]) -> None:
        """Copy arrays into the existing tensors; names and shapes must match exactly."""
        named = dict(self.named_tensors())
        if set(named) != set(state):
            missing = sorted(set(named) - set(state))
            unexpected = sorted(set(state) - set(named))
            raise CheckpointError(f"parameter blocks differ: missing={missing} unexpected={unexpected}")
        for name, tensor in named.items():
            if state[name].shape != tensor.shape:
                raise CheckpointError(f"{name} has shape {state[name].shape}, expected {tensor.shape}")
            tensor.values[...] = state[name]

    def count(self) -> int:
        return sum(tensor.size for _, tensor in self.named_tensors())
