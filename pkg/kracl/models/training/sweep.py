from enum import Enum
from statistics import median
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from ..evaluation import MetricSummary


class SweepKind(str, Enum):
    ABLATION = "ablation"
    SPARSITY = "sparsity"
    NOISE = "noise"


class SweepRun(BaseModel):
    """One train-then-evaluate run of a sweep."""
    label: str
    seed: int
    fraction: Optional[float] = None  # remove or noise fraction for the data sweeps
    best_valid_mrr: Optional[float] = None
    metrics: MetricSummary


class SweepResult(BaseModel):
    kind: SweepKind
    split: str
    runs: List[SweepRun] = Field(default_factory=list)

    def labels(self) -> List[str]:
        return list(dict.fromkeys(run.label for run in self.runs))

    def _median_by_label(self, values: Dict[str, List[float]]) -> Dict[str, Optional[float]]:
        return {label: median(values[label]) if values.get(label) else None for label in self.labels()}

    def median_valid_mrr(self) -> Dict[str, Optional[float]]:
        values: Dict[str, List[float]] = {}
        for run in self.runs:
            if run.best_valid_mrr is not None:
                values.setdefault(run.label, []).append(run.best_valid_mrr)
        return self._median_by_label(values)

    def median_mrr(self) -> Dict[str, Optional[float]]:
        """Median over seeds of the evaluated split's MRR, per label in run order."""
        values: Dict[str, List[float]] = {}
        for run in self.runs:
            if run.metrics.mrr is not None:
                values.setdefault(run.label, []).append(run.metrics.mrr)
        return self._median_by_label(values)
