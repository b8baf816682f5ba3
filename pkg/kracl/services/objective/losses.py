"""Knowledge contrastive loss, 1-N cross entropy, and the binary cross-entropy ablation."""
import logging
import math
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ...core.errors import InvariantViolation, LossError
from ...engine import Tensor, ops
from ...models.objective import Batch, LossConfig

logger = logging.getLogger(__name__)

LossValue = Union[Tensor, float]


def make_batch(
    queries: np.ndarray,
    gold_objects: np.ndarray,
    known_objects: Mapping[Tuple[int, int], np.ndarray],
) -> Batch:
    """Attach multi-label targets and the gold-object grouping to a block of queries."""
    queries = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
    gold_objects = np.asarray(gold_objects, dtype=np.int64).reshape(-1)
    targets = [np.asarray(known_objects.get((int(s), int(r)), ()), dtype=np.int64) for s, r in queries.tolist()]
    objects, inverse = np.unique(gold_objects, return_inverse=True)
    grouping: Dict[int, np.ndarray] = {
        int(obj): np.flatnonzero(inverse == position) for position, obj in enumerate(objects.tolist())
    }
    batch = Batch(
        queries=queries,
        gold_objects=gold_objects,
        multi_label_targets=targets,
        positive_grouping=grouping,
    )
    batch.check()
    return batch


def contrastive_loss(predictions: Tensor, entities: Tensor, batch: Batch, cfg: LossConfig) -> Tensor:
    """
    Sum over gold objects o of -(1/|T_o|) Σ_{z∈T_o} log(exp(z·h_o/τ) / Σ_{k∉T_o} exp(z_k·h_o/τ)).

    Rows of both matrices are L2-normalized first; the denominator runs over
    the batch predictions whose gold object is not o.
    """
    if batch.size == 0:
        raise LossError("contrastive loss needs at least one query")
    objects = np.asarray(sorted(batch.positive_grouping), dtype=np.int64)
    positive = np.zeros((batch.size, objects.size), dtype=predictions.dtype)
    for column, obj in enumerate(objects.tolist()):
        positive[batch.positive_grouping[obj], column] = 1.0
    negative = 1.0 - positive
    if np.any(negative.sum(axis=0) == 0):
        raise LossError(
            "every query in the batch shares one gold object, so the contrastive denominator is empty; "
            "use larger or shuffled batches"
        )

    z = ops.l2_normalize_rows(predictions)
    h = ops.gather_rows(ops.l2_normalize_rows(entities), objects)
    similarities = ops.mul(ops.matmul(z, h.T), 1.0 / cfg.temperature)

    # Positives are pinned to the column shift so only negatives reach exp
    masked = np.where(negative > 0, similarities.values, -np.inf)
    shift = np.max(masked, axis=0, keepdims=True).astype(predictions.dtype)
    negatives_only = ops.add(ops.mul(similarities, negative), shift * positive)
    e = ops.mul(ops.exp(ops.sub(negatives_only, shift)), negative)
    log_denominators = ops.add(ops.log(ops.sum(e, axis=0, keepdims=True)), shift)
    log_ratio = ops.sub(similarities, log_denominators)

    # log(ratio + ε) = log ε + softplus(log ratio - log ε)
    floor = math.log(cfg.epsilon)
    log_ratio = ops.add(ops.softplus(ops.sub(log_ratio, floor)), floor)

    weights = positive / positive.sum(axis=0, keepdims=True)
    return ops.neg(ops.sum(ops.mul(log_ratio, weights)))


def _target_matrix(batch: Batch, num_entities: int, dtype) -> np.ndarray:
    labels = np.zeros((batch.size, num_entities), dtype=dtype)
    for row, targets in enumerate(batch.multi_label_targets):
        if targets.size == 0:
            raise InvariantViolation(f"query {row} has an empty target set")
        labels[row, targets] = 1.0
    return labels


def cross_entropy_loss(scores: Tensor, batch: Batch, cfg: LossConfig) -> Tensor:
    """Softmax cross entropy against the multi-label row normalized to a distribution."""
    num_entities = scores.shape[1]
    targets = _target_matrix(batch, num_entities, scores.dtype)
    targets /= targets.sum(axis=1, keepdims=True)
    if cfg.label_smoothing:
        targets = (1.0 - cfg.label_smoothing) * targets + cfg.label_smoothing / num_entities
    log_probs = ops.log(ops.add(ops.softmax_rows(scores), cfg.epsilon))
    return ops.mul(ops.sum(ops.mul(log_probs, targets)), -1.0 / batch.size)


def bce_loss(scores: Tensor, batch: Batch, cfg: LossConfig) -> Tensor:
    """Mean binary cross entropy of sigmoid(scores) against the 0/1 label matrix."""
    labels = _target_matrix(batch, scores.shape[1], scores.dtype)
    if cfg.label_smoothing:
        labels = (1.0 - cfg.label_smoothing) * labels + cfg.label_smoothing / scores.shape[1]
    # softplus(x) - y·x equals -[y·log σ(x) + (1-y)·log(1-σ(x))]
    return ops.mean(ops.sub(ops.softplus(scores), ops.mul(scores, labels)))


def total_loss(
    cl: Optional[LossValue],
    ce: Optional[LossValue],
    cfg: LossConfig,
    bce: Optional[LossValue] = None,
) -> LossValue:
    if cfg.bce_mode:
        if bce is None:
            raise LossError("bce_mode is set but no binary cross-entropy term was computed")
        return bce
    parts: Sequence[Optional[LossValue]] = [cl if cfg.use_cl else None, ce if cfg.use_ce else None]
    enabled = [part for part in parts if part is not None]
    if not enabled:
        raise LossError("no loss term is enabled")
    total = enabled[0]
    for part in enabled[1:]:
        total = total + part
    return total


class ObjectiveService:
    """Evaluates the configured training objective on one batch."""

    def __init__(self, cfg: LossConfig):
        self.cfg = cfg

    def __call__(
        self,
        predictions: Tensor,
        scores: Tensor,
        entities: Tensor,
        batch: Batch,
    ) -> Tuple[Optional[LossValue], Dict[str, float]]:
        """
        Loss and its per-term values. The contrastive term is left out of a
        batch whose queries all share one gold object; when no other term
        remains the loss is None and the batch carries no update.
        """
        parts: Dict[str, float] = {}
        cl = ce = bce = None
        if self.cfg.bce_mode:
            bce = bce_loss(scores, batch, self.cfg)
            parts["bce"] = bce.item()
        else:
            if self.cfg.use_cl and len(batch.positive_grouping) < 2:
                logger.debug("batch_size=%d single gold object, contrastive term skipped", batch.size)
            elif self.cfg.use_cl:
                cl = contrastive_loss(predictions, entities, batch, self.cfg)
                parts["cl"] = cl.item()
            if self.cfg.use_ce:
                ce = cross_entropy_loss(scores, batch, self.cfg)
                parts["ce"] = ce.item()
        if not parts:
            return None, parts
        return total_loss(cl, ce, self.cfg, bce), parts
