"""Repeated train-then-evaluate runs behind the ablation, sparsity and noise experiments."""
import logging
from typing import Any, Callable, Dict, Iterable, Optional, Sequence

from ...core.errors import ConfigError
from ...models.dataset import Dataset, Split
from ...models.evaluation import MetricSummary
from ...models.training import SweepKind, SweepResult, SweepRun, TrainConfig
from ..data import DatasetService, corrupt_add_noise, corrupt_remove
from ..evaluation import evaluate
from .training_service import train

logger = logging.getLogger(__name__)

# Variant name -> TrainConfig fields switched on for that variant
ABLATIONS: Dict[str, Dict[str, Any]] = {
    "full": {},
    "uniform_attention": {"uniform_attention": True},
    "no_cl": {"no_cl": True},
    "bce_mode": {"bce_mode": True},
    "no_residual": {"no_residual": True},
    "no_krat": {"no_krat": True},
}
DEFAULT_ABLATIONS = ("full", "uniform_attention", "no_cl", "bce_mode")
DEFAULT_REMOVE_FRACTIONS = (0.0, 0.25, 0.5)
DEFAULT_NOISE_FRACTIONS = (0.0, 0.1, 0.2, 0.3)


class SweepService:
    """Trains one model per (variant or fraction, seed) and evaluates each best checkpoint on ``split``."""

    def __init__(self, cfg: TrainConfig, dataset: Optional[Dataset] = None, split: Split = Split.TEST):
        self.cfg = cfg
        self.dataset = dataset or DatasetService().load(cfg.dataset)
        self.split = Split(split)

    def _run(self, label: str, cfg: TrainConfig, dataset: Dataset, fraction: Optional[float] = None) -> SweepRun:
        ckpt = train(cfg, dataset)
        report = evaluate(ckpt, self.split, dataset)
        run = SweepRun(
            label=label,
            seed=cfg.seed,
            fraction=fraction,
            best_valid_mrr=ckpt.best_valid_mrr,
            metrics=MetricSummary(**{name: getattr(report, name) for name in MetricSummary.model_fields}),
        )
        logger.info(
            "sweep run label=%s seed=%d best_valid_mrr=%s %s_mrr=%s",
            label, cfg.seed, run.best_valid_mrr, self.split.value, run.metrics.mrr,
        )
        return run

    def ablation(self, variants: Sequence[str] = DEFAULT_ABLATIONS, seeds: Iterable[int] = (0, 1, 2)) -> SweepResult:
        unknown = [name for name in variants if name not in ABLATIONS]
        if unknown:
            raise ConfigError(f"unknown ablation variants {unknown}; choose from {sorted(ABLATIONS)}")
        result = SweepResult(kind=SweepKind.ABLATION, split=self.split.value)
        for seed in seeds:
            for name in variants:
                cfg = self.cfg.model_copy(update={**ABLATIONS[name], "seed": seed})
                result.runs.append(self._run(name, cfg, self.dataset))
        return result

    def _data_sweep(
        self,
        kind: SweepKind,
        corrupt: Callable[[Dataset, float, int], Dataset],
        fractions: Sequence[float],
        seed: int,
    ) -> SweepResult:
        result = SweepResult(kind=kind, split=self.split.value)
        cfg = self.cfg.model_copy(update={"seed": seed})
        for fraction in fractions:
            dataset = corrupt(self.dataset, fraction, seed)
            result.runs.append(self._run(f"{kind.value}={fraction:g}", cfg, dataset, fraction))
        return result

    def sparsity(self, fractions: Sequence[float] = DEFAULT_REMOVE_FRACTIONS, seed: int = 0) -> SweepResult:
        return self._data_sweep(SweepKind.SPARSITY, corrupt_remove, fractions, seed)

    def noise(self, fractions: Sequence[float] = DEFAULT_NOISE_FRACTIONS, seed: int = 0) -> SweepResult:
        return self._data_sweep(SweepKind.NOISE, corrupt_add_noise, fractions, seed)
