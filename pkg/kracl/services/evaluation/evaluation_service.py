"""Filtered link-prediction ranking, metric aggregation and the bucketed analyses."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ...core.config import settings
from ...core.decorators import timed
from ...core.errors import CheckpointError, SegmentIndexError
from ...core.metrics import EVAL_QUERIES
from ...models.dataset import CategoryName, Dataset, DatasetStats, RelationCategories, Split
from ...models.evaluation import BandRow, CategoryRow, Direction, EvalReport, MetricSummary
from ...models.training import Checkpoint, TieMode
from ..data import (
    DEFAULT_INDEGREE_BOUNDS,
    DatasetService,
    augmented_triples,
    band_labels,
    band_of,
    categorize_relations,
    compute_stats,
    known_objects_index,
)
from ..model import KraclModel

logger = logging.getLogger(__name__)

KnownObjects = Mapping[Tuple[int, int], np.ndarray]
_EMPTY = np.zeros(0, dtype=np.int64)


def filtered_rank(
    scores: np.ndarray,
    gold: int,
    known_objects: Iterable[int] = (),
    tie_mode: TieMode = TieMode.STRICT,
) -> int:
    """
    1 + the number of candidates outscoring the gold entity, where candidates
    exclude every known true object other than the gold one. In pessimistic
    mode candidates tied with the gold score count against it as well.
    """
    scores = np.asarray(scores).reshape(-1)
    if not 0 <= gold < scores.size:
        raise SegmentIndexError(f"gold entity {gold} is outside the {scores.size} scored entities")
    candidate = np.ones(scores.size, dtype=bool)
    known = np.fromiter(known_objects, dtype=np.int64)
    candidate[known] = False
    candidate[gold] = False
    gold_score = scores[gold]
    if TieMode(tie_mode) is TieMode.PESSIMISTIC:
        better = scores >= gold_score
    else:
        better = scores > gold_score
    return 1 + int(np.count_nonzero(better & candidate))


def filtered_ranks(
    scores: np.ndarray,
    golds: np.ndarray,
    known_objects: Sequence[np.ndarray],
    tie_mode: TieMode = TieMode.STRICT,
) -> np.ndarray:
    """Row-wise :func:`filtered_rank` over a B×|E| score matrix."""
    scores = np.asarray(scores)
    golds = np.asarray(golds, dtype=np.int64)
    rows = np.arange(scores.shape[0])
    if golds.size and (golds.min() < 0 or golds.max() >= scores.shape[1]):
        raise SegmentIndexError(f"gold entity outside the {scores.shape[1]} scored entities")
    candidate = np.ones(scores.shape, dtype=bool)
    lengths = [len(known) for known in known_objects]
    if sum(lengths):
        candidate[np.repeat(rows, lengths), np.concatenate(known_objects)] = False
    candidate[rows, golds] = False
    gold_scores = scores[rows, golds][:, None]
    if TieMode(tie_mode) is TieMode.PESSIMISTIC:
        better = scores >= gold_scores
    else:
        better = scores > gold_scores
    return 1 + np.count_nonzero(better & candidate, axis=1)


def _summary(report: EvalReport, mask: np.ndarray) -> MetricSummary:
    return MetricSummary.from_ranks(report.ranks[mask])


def analyze_by_indegree(
    report: EvalReport,
    stats: DatasetStats,
    bounds: Sequence[int] = DEFAULT_INDEGREE_BOUNDS,
) -> List[BandRow]:
    """Tail queries grouped by the training in-degree band of their gold entity."""
    in_degrees = np.asarray(stats.in_degrees, dtype=np.int64)
    tail = report.tail_mask()
    gold_bands = band_of(in_degrees[report.queries[:, 2]], bounds) if report.queries.size else _EMPTY
    edges = list(bounds)
    rows = []
    for index, label in enumerate(band_labels(bounds)):
        upper = edges[index + 1] if index + 1 < len(edges) else None
        rows.append(
            BandRow(
                band=label,
                lower=edges[index],
                upper=upper,
                metrics=_summary(report, tail & (gold_bands == index)),
            )
        )
    return rows


def analyze_by_relation_category(report: EvalReport, categories: RelationCategories) -> List[CategoryRow]:
    """Head and Tail blocks, one row per relation category; head queries use inverse relation ids."""
    relations = report.queries[:, 1]
    original = relations % report.num_relations if report.num_relations else relations
    query_category = np.array(
        [categories[r].category.value if r in categories else "" for r in original.tolist()],
        dtype=object,
    )
    tail = report.tail_mask()
    rows = []
    for direction, mask in ((Direction.HEAD, ~tail), (Direction.TAIL, tail)):
        for name in CategoryName:
            rows.append(
                CategoryRow(
                    direction=direction,
                    category=name.value,
                    metrics=_summary(report, mask & (query_category == name.value)),
                )
            )
    return rows


def build_report(
    split: str,
    queries: np.ndarray,
    ranks: np.ndarray,
    num_entities: int,
    num_relations: int,
    stats: Optional[DatasetStats] = None,
    categories: Optional[RelationCategories] = None,
) -> EvalReport:
    overall = MetricSummary.from_ranks(ranks)
    report = EvalReport(
        **{name: getattr(overall, name) for name in MetricSummary.model_fields},
        split=split,
        num_entities=num_entities,
        num_relations=num_relations,
        queries=np.asarray(queries, dtype=np.int64).reshape(-1, 3),
        ranks=np.asarray(ranks, dtype=np.int64),
    )
    tail = report.tail_mask()
    report.head = _summary(report, ~tail)
    report.tail = _summary(report, tail)
    if stats is not None:
        report.by_indegree = analyze_by_indegree(report, stats)
    if categories is not None:
        report.by_relation_category = analyze_by_relation_category(report, categories)
    return report


class EvaluationService:
    """Ranks both prediction directions of a split against one frozen encoding."""

    def __init__(
        self,
        workers: Optional[int] = None,
        chunk_size: Optional[int] = None,
        tie_mode: TieMode = TieMode.STRICT,
    ):
        self.workers = max(1, workers or settings.EVAL_WORKERS)
        self.chunk_size = max(1, chunk_size or settings.EVAL_BATCH_SIZE)
        self.tie_mode = tie_mode

    def rank_queries(self, model: KraclModel, queries: np.ndarray, known: KnownObjects) -> np.ndarray:
        if queries.shape[0] == 0:
            return _EMPTY
        entities, relations = model.encode(train_mode=False)

        def rank_chunk(start: int) -> np.ndarray:
            block = queries[start:start + self.chunk_size]
            _, scores = model.predict(entities, relations, block[:, :2])
            filters = [known.get((s, r), _EMPTY) for s, r in block[:, :2].tolist()]
            return filtered_ranks(scores.values, block[:, 2], filters, self.tie_mode)

        starts = range(0, queries.shape[0], self.chunk_size)
        if self.workers == 1:
            chunks = [rank_chunk(start) for start in starts]
        else:
            # map yields results in submission order, so the merge is deterministic
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                chunks = list(pool.map(rank_chunk, starts))
        return np.concatenate(chunks)

    @timed("evaluate")
    def evaluate_model(self, model: KraclModel, dataset: Dataset, split: Split) -> EvalReport:
        split = Split(split)
        num_relations = dataset.num_relations
        # Tail queries first, then head queries through the inverse relation
        queries = augmented_triples(dataset.split(split), num_relations)
        known = known_objects_index(augmented_triples(dataset.all_triples(), num_relations))
        ranks = self.rank_queries(model, queries, known)
        EVAL_QUERIES.labels(split=split.value).inc(int(ranks.size))
        report = build_report(
            split.value,
            queries,
            ranks,
            dataset.num_entities,
            num_relations,
            stats=compute_stats(dataset),
            categories=categorize_relations(dataset.train),
        )
        logger.info(
            "evaluated split=%s queries=%d mrr=%s hits10=%s",
            split.value,
            report.count,
            report.mrr,
            report.hits10,
        )
        return report

    def evaluate(self, ckpt: Checkpoint, split: Split, dataset: Optional[Dataset] = None) -> EvalReport:
        dataset = dataset or DatasetService().load(ckpt.config.dataset)
        if ckpt.entity_names and ckpt.entity_names != dataset.entity_names:
            raise CheckpointError(f"checkpoint vocabulary does not match dataset {dataset.name!r}")
        model = KraclModel.from_checkpoint(ckpt, dataset)
        return self.evaluate_model(model, dataset, split)


def evaluate(ckpt: Checkpoint, split: Split, dataset: Optional[Dataset] = None) -> EvalReport:
    return EvaluationService(tie_mode=ckpt.config.tie_mode).evaluate(ckpt, split, dataset)
