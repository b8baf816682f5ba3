"""Assembles embedding tables, KRAT layers and the projection head into one forward pass."""
import logging
from typing import Optional, Tuple

import numpy as np

from ...engine import Tensor, ops
from ...models.dataset import ContextGraph, Dataset
from ...models.training import Checkpoint, ModelParameters, TrainConfig
from ..data import augment_inverse
from ..encoder import encode, init_layer, init_tables
from ..scoring import init_head, project, score_all

logger = logging.getLogger(__name__)


def build_parameters(cfg: TrainConfig, dataset: Dataset, rng: np.random.Generator) -> ModelParameters:
    """Fresh parameters drawn in a fixed order: tables, layers, head."""
    dtype = cfg.dtype
    tables = init_tables(dataset.num_entities, 2 * dataset.num_relations, cfg.dim, rng, dtype)
    layers = [
        init_layer(
            cfg.dim,
            cfg.operators,
            rng,
            dtype,
            negative_slope=cfg.leaky_slope,
            dropout=cfg.encoder_dropout,
            uniform_attention=cfg.uniform_attention,
            residual=not cfg.no_residual,
        )
        for _ in range(cfg.effective_layers)
    ]
    head = init_head(
        cfg.head_kind,
        cfg.dim,
        rng,
        dtype,
        filters=cfg.conv_filters,
        kernel=cfg.conv_kernel,
        reshape_width=cfg.conv_reshape_width,
        dropout=cfg.head_dropout,
    )
    return ModelParameters(tables=tables, layers=layers, head=head)


class KraclModel:
    """Parameters bound to the inverse-augmented training graph they are encoded over."""

    def __init__(self, cfg: TrainConfig, parameters: ModelParameters, graph: ContextGraph):
        self.cfg = cfg
        self.parameters = parameters
        self.graph = graph

    @classmethod
    def build(cls, cfg: TrainConfig, dataset: Dataset, rng: np.random.Generator) -> "KraclModel":
        parameters = build_parameters(cfg, dataset, rng)
        logger.info(
            "model built entities=%d relations=%d layers=%d head=%s parameters=%d",
            dataset.num_entities,
            dataset.num_relations,
            len(parameters.layers),
            cfg.head_kind.value,
            parameters.count(),
        )
        return cls(cfg, parameters, augment_inverse(dataset))

    @classmethod
    def from_checkpoint(cls, ckpt: Checkpoint, dataset: Dataset) -> "KraclModel":
        # Initial values are overwritten, so the generator only fixes shapes
        parameters = build_parameters(ckpt.config, dataset, np.random.default_rng(0))
        parameters.load_state(ckpt.parameters)
        return cls(ckpt.config, parameters, augment_inverse(dataset))

    def encode(self, train_mode: bool = False, rng: Optional[np.random.Generator] = None) -> Tuple[Tensor, Tensor]:
        return encode(self.graph, self.parameters.tables, self.parameters.layers, train_mode, rng)

    def predict(
        self,
        entities: Tensor,
        relations: Tensor,
        queries: np.ndarray,
        train_mode: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[Tensor, Tensor]:
        """Predicted object vectors and their 1-N score matrix for a block of (s, r) queries."""
        queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
        h_s = ops.gather_rows(entities, queries[:, 0])
        h_r = ops.gather_rows(relations, queries[:, 1])
        z = project(self.parameters.head, h_s, h_r, train_mode, rng)
        return z, score_all(z, entities)

    def forward(
        self,
        queries: np.ndarray,
        train_mode: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[Tensor, Tensor, Tensor]:
        """encode → project → score_all; also returns the final entity table the contrastive term needs."""
        entities, relations = self.encode(train_mode, rng)
        z, scores = self.predict(entities, relations, queries, train_mode, rng)
        return z, scores, entities
