"""Mini-batch training loop with best-validation checkpoint retention."""
import logging
import math
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from dotenv import dotenv_values
from pydantic import ValidationError

from ...core.decorators import timed
from ...core.errors import ConfigError, TrainingDivergedError
from ...core.metrics import BATCH_COUNT, EPOCH_COUNT, LAST_LOSS, VALID_MRR
from ...engine import ComputationGraph
from ...models.dataset import Dataset, Split
from ...models.training import Checkpoint, TrainConfig
from ..data import DatasetService, augmented_triples, known_objects_index
from ..evaluation import EvaluationService
from ..model import KraclModel
from ..objective import ObjectiveService, make_batch
from .optimizer import AdamW

logger = logging.getLogger(__name__)


def load_config(path: Union[str, Path], overrides: Optional[Mapping[str, Any]] = None) -> TrainConfig:
    """
    Read a flat ``key = value`` file whose keys are TrainConfig field names.
    Empty values are treated as unset; ``overrides`` win over the file.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    values: Dict[str, Any] = {
        key.strip(): value for key, value in dotenv_values(path).items() if value not in (None, "")
    }
    unknown = sorted(set(values) - set(TrainConfig.model_fields))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return TrainConfig(**values)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


class TrainingService:
    """Single-writer loop: shuffle, batch, forward, backward, AdamW step, periodic validation."""

    def __init__(self, cfg: TrainConfig, dataset: Optional[Dataset] = None):
        self.cfg = cfg
        self.dataset = dataset or DatasetService().load(cfg.dataset)
        self.rng = np.random.default_rng(cfg.seed)
        self.model = KraclModel.build(cfg, self.dataset, self.rng)
        self.triples = augmented_triples(self.dataset.train, self.dataset.num_relations)
        if self.triples.shape[0] == 0:
            raise ConfigError(f"dataset {self.dataset.name!r} has no training triples")
        self.known = known_objects_index(self.triples)
        self.named = list(self.model.parameters.named_tensors())
        self.steps_per_epoch = math.ceil(self.triples.shape[0] / cfg.batch_size)
        self.optimizer = AdamW(
            self.named,
            lr=cfg.learning_rate,
            weight_decay=cfg.weight_decay,
            grad_clip_norm=cfg.grad_clip_norm,
            schedule=cfg.lr_schedule,
            total_steps=self.steps_per_epoch * cfg.epochs,
        )
        self.objective = ObjectiveService(cfg.loss_config())
        self.evaluator = EvaluationService(tie_mode=cfg.tie_mode)

    @timed("train_batch")
    def _step(self, rows: np.ndarray, epoch: int, index: int) -> Optional[float]:
        batch = make_batch(rows[:, :2], rows[:, 2], self.known)
        with ComputationGraph() as graph:
            z, scores, entities = self.model.forward(batch.queries, train_mode=True, rng=self.rng)
            loss, parts = self.objective(z, scores, entities, batch)
            if loss is None:
                return None
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDivergedError(epoch, index, value)
            gradients = graph.backward(loss)
        named_gradients = {name: graph.gradient(gradients, tensor) for name, tensor in self.named}
        graph.release()
        lr = self.optimizer.step(named_gradients)
        BATCH_COUNT.inc()
        LAST_LOSS.set(value)
        logger.debug("epoch=%d batch=%d loss=%.6f lr=%.3g %s", epoch, index, value, lr, parts)
        return value

    def run_epoch(self, epoch: int) -> float:
        """Mean batch loss of one pass over the shuffled augmented triples; the last partial batch is kept."""
        order = self.rng.permutation(self.triples.shape[0])
        total, counted = 0.0, 0
        for index, start in enumerate(range(0, order.size, self.cfg.batch_size)):
            value = self._step(self.triples[order[start:start + self.cfg.batch_size]], epoch, index)
            if value is not None:
                total += value
                counted += 1
        EPOCH_COUNT.inc()
        return total / counted if counted else float("nan")

    def _snapshot(self) -> Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray], int]:
        return self.model.parameters.state(), self.optimizer.state(), self.optimizer.step_count

    @timed("train")
    def train(self) -> Checkpoint:
        cfg = self.cfg
        has_valid = self.dataset.valid.shape[0] > 0
        history = []
        best: Optional[Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray], int]] = None
        best_epoch, best_mrr = 0, None
        logger.info(
            "training dataset=%s epochs=%d batch_size=%d steps_per_epoch=%d",
            self.dataset.name,
            cfg.epochs,
            cfg.batch_size,
            self.steps_per_epoch,
        )
        for epoch in range(1, cfg.epochs + 1):
            mean_loss = self.run_epoch(epoch)
            history.append(mean_loss)
            logger.info("epoch=%d loss=%.6f lr=%.3g", epoch, mean_loss, self.optimizer.current_lr())
            if has_valid and (epoch % cfg.eval_every == 0 or epoch == cfg.epochs):
                mrr = self.evaluator.evaluate_model(self.model, self.dataset, Split.VALID).mrr
                VALID_MRR.set(mrr)
                logger.info("epoch=%d valid_mrr=%.4f best=%s", epoch, mrr, best_mrr)
                if best_mrr is None or mrr > best_mrr:
                    best, best_epoch, best_mrr = self._snapshot(), epoch, mrr
        if best is None:
            best, best_epoch = self._snapshot(), cfg.epochs
        parameters, moments, step_count = best
        return Checkpoint(
            config=cfg,
            parameters=parameters,
            optimizer_moments=moments,
            optimizer_step=step_count,
            epoch=best_epoch,
            seed_state={"seed": cfg.seed, "bit_generator": self.rng.bit_generator.state},
            best_valid_mrr=best_mrr,
            loss_history=history,
            entity_names=self.dataset.entity_names,
            relation_names=self.dataset.relation_names,
        )


def train(cfg: TrainConfig, dataset: Optional[Dataset] = None) -> Checkpoint:
    return TrainingService(cfg, dataset).train()
