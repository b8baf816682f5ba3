from typing import Optional
from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

# Dedicated registry so repeated imports in tests never collide with the default one
REGISTRY = CollectorRegistry()

# Training progress
EPOCH_COUNT = Counter(
    "kracl_train_epochs_total",
    "Completed training epochs",
    registry=REGISTRY,
)

BATCH_COUNT = Counter(
    "kracl_train_batches_total",
    "Completed optimizer steps",
    registry=REGISTRY,
)

# Duration histograms, labelled by the timed stage
STAGE_DURATION = Histogram(
    "kracl_stage_duration_seconds",
    "Wall time of training and evaluation stages",
    ["stage"],
    registry=REGISTRY,
)

LAST_LOSS = Gauge(
    "kracl_train_last_loss",
    "Loss of the most recent training batch",
    registry=REGISTRY,
)

VALID_MRR = Gauge(
    "kracl_valid_mrr",
    "Most recent filtered validation MRR",
    registry=REGISTRY,
)

EVAL_QUERIES = Counter(
    "kracl_eval_queries_total",
    "Ranked evaluation queries",
    ["split"],
    registry=REGISTRY,
)


def export_metrics(path: Optional[str]) -> None:
    """Write the registry in prometheus text format when a path is configured."""
    if path:
        write_to_textfile(path, REGISTRY)
