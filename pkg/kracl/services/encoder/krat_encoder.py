"""
KRAT layer stack.

Each layer builds one message per context edge by applying every configured
composition operator to (subject, relation), projecting each result with its
own matrix and concatenating; messages are weighted by a per-object softmax
over triple-level attention scores, summed, projected by ``w_agg`` and
added to the residual ``w_res · h_o`` before Tanh. Relation rows are updated
by a linear map only.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ...core.errors import ConfigError, DimensionError
from ...engine import Tensor, ops
from ...engine.init import glorot_uniform
from ...models.dataset import ContextGraph
from ...models.encoder import EmbeddingTables, KratLayerParams, Operator, canonical_operators

logger = logging.getLogger(__name__)


def compose(operator: Operator, h_s: Tensor, h_r: Tensor) -> Tensor:
    """Fuse subject and relation rows with one composition operator."""
    if h_s.shape != h_r.shape:
        raise DimensionError(f"subject {h_s.shape} and relation {h_r.shape} rows differ")
    if operator is Operator.SUB:
        return ops.sub(h_s, h_r)
    if operator is Operator.MULT:
        return ops.mul(h_s, h_r)
    if operator is Operator.ROT:
        return ops.rotate_pairs(h_s, h_r)
    if operator is Operator.CORR:
        return ops.circular_correlation(h_s, h_r)
    raise ConfigError(f"unknown composition operator {operator!r}")


def _as_rows(x: Tensor) -> Tuple[Tensor, bool]:
    return (ops.reshape(x, (1, x.shape[0])), True) if x.ndim == 1 else (x, False)


def message(h_s: Tensor, h_r: Tensor, params: KratLayerParams) -> Tensor:
    """LeakyReLU over the concatenation of W_i·φ_i(h_s, h_r), one block per operator."""
    if not params.operators:
        raise ConfigError("operator subset must not be empty")
    rows_s, single = _as_rows(h_s)
    rows_r, _ = _as_rows(h_r)
    blocks = [
        ops.matmul(compose(op, rows_s, rows_r), weight.T)
        for op, weight in zip(params.operators, params.operator_weights)
    ]
    out = ops.leaky_relu(ops.concat(blocks, axis=1), params.negative_slope)
    return ops.reshape(out, (out.shape[1],)) if single else out


def attention_scores(h_s: Tensor, h_r: Tensor, h_o: Tensor, params: KratLayerParams) -> Tensor:
    """Raw per-edge score a · LeakyReLU(W_att [h_s ‖ h_r ‖ h_o])."""
    stacked = ops.concat([h_s, h_r, h_o], axis=1)
    hidden = ops.leaky_relu(ops.matmul(stacked, params.w_att.T), params.negative_slope)
    scores = ops.matmul(hidden, params.attention.T)
    return ops.reshape(scores, (scores.shape[0],))


def attention_weights(graph: ContextGraph, scores: Optional[Tensor], params: KratLayerParams, dtype) -> Tensor:
    """Per-object softmax of the scores, or 1/|N_o| when attention is ablated."""
    if params.uniform_attention:
        counts = graph.in_degree()
        return Tensor((1.0 / counts[graph.objects]).astype(dtype))
    return ops.softmax_segments(scores, graph.objects, graph.num_entities)


def krat_layer_forward(
    graph: ContextGraph,
    entities: Tensor,
    relations: Tensor,
    params: KratLayerParams,
    train_mode: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Tensor, Tensor]:
    params.validate_dimensions()
    if entities.shape != (graph.num_entities, params.dim):
        raise ConfigError(f"entity table {entities.shape} does not match graph ({graph.num_entities}, {params.dim})")
    if relations.shape != (graph.num_relations_augmented, params.dim):
        raise ConfigError(
            f"relation table {relations.shape} does not match graph ({graph.num_relations_augmented}, {params.dim})"
        )

    h_s = ops.gather_rows(entities, graph.subjects)
    h_r = ops.gather_rows(relations, graph.relations)
    messages = message(h_s, h_r, params)

    scores = None
    if not params.uniform_attention:
        scores = attention_scores(h_s, h_r, ops.gather_rows(entities, graph.objects), params)
    alpha = attention_weights(graph, scores, params, entities.dtype)

    # W_agg is linear, so it is applied once per entity after the weighted sum
    aggregated = ops.segment_weighted_sum(messages, alpha, graph.objects, graph.num_entities)
    aggregated = ops.matmul(aggregated, params.w_agg.T)
    aggregated = ops.dropout(aggregated, params.dropout, rng, train_mode)
    if params.residual:
        aggregated = ops.add(aggregated, ops.matmul(entities, params.w_res.T))
    return ops.tanh(aggregated), ops.matmul(relations, params.w_rel.T)


def encode(
    graph: ContextGraph,
    tables: EmbeddingTables,
    layers: Sequence[KratLayerParams],
    train_mode: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Tensor, Tensor]:
    """Apply the layers in order; with no layers the raw tables come back unchanged."""
    entities, relations = tables.entity, tables.relation
    for params in layers:
        entities, relations = krat_layer_forward(graph, entities, relations, params, train_mode, rng)
    return entities, relations


def init_tables(
    num_entities: int,
    num_relations_augmented: int,
    dim: int,
    rng: np.random.Generator,
    dtype=np.float32,
) -> EmbeddingTables:
    return EmbeddingTables(
        entity=glorot_uniform((num_entities, dim), rng, dtype),
        relation=glorot_uniform((num_relations_augmented, dim), rng, dtype),
    )


def init_layer(
    dim: int,
    operators: Sequence[Operator],
    rng: np.random.Generator,
    dtype=np.float32,
    negative_slope: float = 0.2,
    dropout: float = 0.0,
    uniform_attention: bool = False,
    residual: bool = True,
) -> KratLayerParams:
    operators = canonical_operators(operators)
    params = KratLayerParams(
        operators=operators,
        operator_weights=[glorot_uniform((dim, dim), rng, dtype) for _ in operators],
        w_agg=glorot_uniform((dim, len(operators) * dim), rng, dtype),
        w_res=glorot_uniform((dim, dim), rng, dtype),
        w_att=glorot_uniform((dim, 3 * dim), rng, dtype),
        attention=glorot_uniform((1, dim), rng, dtype),
        w_rel=glorot_uniform((dim, dim), rng, dtype),
        negative_slope=negative_slope,
        dropout=dropout,
        uniform_attention=uniform_attention,
        residual=residual,
    )
    params.validate_dimensions()
    return params
