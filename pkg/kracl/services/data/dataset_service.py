import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from ...core.config import settings
from ...core.errors import ConfigError, DatasetParseError
from ...models.dataset import (
    CategoryName,
    ContextGraph,
    Dataset,
    DatasetStats,
    RelationCategories,
    RelationCategory,
    Split,
)

logger = logging.getLogger(__name__)

SPLIT_FILES = {
    Split.TRAIN: "train.txt",
    Split.VALID: "valid.txt",
    Split.TEST: "test.txt",
}

# Optional name<TAB>id files; when present they fix the ids before the splits are read
ENTITY_DICTIONARY = "entity2id.txt"
RELATION_DICTIONARY = "relation2id.txt"

# Band edges for the in-degree analysis; the last band is [100, max]
DEFAULT_INDEGREE_BOUNDS: Tuple[int, ...] = (0, 10, 20, 30, 40, 50, 100)

# tphr / hptr at or above this value put a relation on the "many" side
MANY_THRESHOLD = 1.5


def _read_split(path: Path, entity_ids: Dict[str, int], relation_ids: Dict[str, int]) -> np.ndarray:
    rows: List[Tuple[int, int, int]] = []
    seen: Set[Tuple[int, int, int]] = set()
    duplicates = 0
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise DatasetParseError(str(path), line_number, f"expected 3 tab-separated fields, found {len(fields)}")
            subject, relation, obj = (field.strip() for field in fields)
            triple = (
                entity_ids.setdefault(subject, len(entity_ids)),
                relation_ids.setdefault(relation, len(relation_ids)),
                entity_ids.setdefault(obj, len(entity_ids)),
            )
            if triple in seen:
                duplicates += 1
                continue
            seen.add(triple)
            rows.append(triple)
    if duplicates:
        logger.warning("file=%s duplicates_dropped=%d", path, duplicates)
    return np.asarray(rows, dtype=np.int64).reshape(-1, 3)


def _read_dictionary(path: Path) -> Dict[str, int]:
    ids: Dict[str, int] = {}
    if not path.is_file():
        return ids
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[1].strip().isdigit():
                raise DatasetParseError(str(path), line_number, "expected name<TAB>id")
            name = fields[0].strip()
            if int(fields[1]) != len(ids) or name in ids:
                raise DatasetParseError(str(path), line_number, f"ids must run 0, 1, 2, ... without repeats, found {fields[1].strip()}")
            ids[name] = len(ids)
    return ids


def load_dataset(directory: Union[str, Path]) -> Dataset:
    """
    Read train/valid/test triples from a benchmark directory.

    Ids are assigned in first-appearance order over train, then valid, then test.
    Names listed in entity2id.txt / relation2id.txt keep their listed ids and
    come before any name first seen in a split.
    """
    directory = Path(directory)
    entity_ids = _read_dictionary(directory / ENTITY_DICTIONARY)
    relation_ids = _read_dictionary(directory / RELATION_DICTIONARY)
    splits: Dict[Split, np.ndarray] = {}
    for split, filename in SPLIT_FILES.items():
        path = directory / filename
        if not path.is_file():
            raise FileNotFoundError(f"dataset file not found: {path}")
        splits[split] = _read_split(path, entity_ids, relation_ids)

    dataset = Dataset(
        name=directory.name,
        entity_names=list(entity_ids),
        relation_names=list(relation_ids),
        train=splits[Split.TRAIN],
        valid=splits[Split.VALID],
        test=splits[Split.TEST],
    )
    overlap = _split_overlap(dataset)
    if overlap:
        logger.warning("dataset=%s triples_shared_between_splits=%d", dataset.name, overlap)
    logger.info(
        "dataset=%s entities=%d relations=%d train=%d valid=%d test=%d",
        dataset.name, dataset.num_entities, dataset.num_relations,
        len(dataset.train), len(dataset.valid), len(dataset.test),
    )
    return dataset


def _split_overlap(dataset: Dataset) -> int:
    sets = [set(map(tuple, dataset.split(split).tolist())) for split in Split]
    return len(sets[0] & sets[1]) + len(sets[0] & sets[2]) + len(sets[1] & sets[2])


def save_dataset(dataset: Dataset, directory: Union[str, Path]) -> Path:
    """
    Write the splits back in the benchmark layout, one tab-separated triple per line,
    plus the entity and relation dictionaries so that ids survive a reload even for
    names no remaining triple mentions.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for split, filename in SPLIT_FILES.items():
        with open(directory / filename, "w", encoding="utf-8") as handle:
            for s, r, o in dataset.split(split).tolist():
                handle.write(f"{dataset.entity_names[s]}\t{dataset.relation_names[r]}\t{dataset.entity_names[o]}\n")
    for filename, names in ((ENTITY_DICTIONARY, dataset.entity_names), (RELATION_DICTIONARY, dataset.relation_names)):
        with open(directory / filename, "w", encoding="utf-8") as handle:
            handle.writelines(f"{name}\t{index}\n" for index, name in enumerate(names))

    triples = dataset.all_triples()
    unused_entities = dataset.num_entities - np.unique(triples[:, [0, 2]]).size
    unused_relations = dataset.num_relations - np.unique(triples[:, 1]).size
    if unused_entities or unused_relations:
        logger.info(
            "dataset=%s out=%s dictionary_only_entities=%d dictionary_only_relations=%d",
            dataset.name, directory, unused_entities, unused_relations,
        )
    return directory


def build_context_graph(
    subjects: np.ndarray,
    relations: np.ndarray,
    objects: np.ndarray,
    num_entities: int,
    num_relations: int,
) -> ContextGraph:
    """Group already-augmented edges by object entity."""
    objects = np.asarray(objects, dtype=np.int64)
    counts = np.bincount(objects, minlength=num_entities) if objects.size else np.zeros(num_entities, dtype=np.int64)
    return ContextGraph(
        num_entities=num_entities,
        num_relations=num_relations,
        subjects=np.asarray(subjects, dtype=np.int64),
        relations=np.asarray(relations, dtype=np.int64),
        objects=objects,
        order=np.argsort(objects, kind="stable"),
        offsets=np.concatenate([[0], np.cumsum(counts)]).astype(np.int64),
    )


def augment_inverse(dataset: Dataset) -> ContextGraph:
    """Every training triple (s, r, o) yields edges (s, r, o) and (o, r + |R|, s)."""
    train = dataset.train
    num_relations = dataset.num_relations
    return build_context_graph(
        subjects=np.concatenate([train[:, 0], train[:, 2]]),
        relations=np.concatenate([train[:, 1], train[:, 1] + num_relations]),
        objects=np.concatenate([train[:, 2], train[:, 0]]),
        num_entities=dataset.num_entities,
        num_relations=num_relations,
    )


def inverse_relation(relation: int, num_relations: int) -> int:
    return (relation + num_relations) % (2 * num_relations)


def augmented_triples(triples: np.ndarray, num_relations: int) -> np.ndarray:
    """Original rows followed by their flipped copies (o, r + |R|, s)."""
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    flipped = np.stack([triples[:, 2], triples[:, 1] + num_relations, triples[:, 0]], axis=1)
    return np.concatenate([triples, flipped], axis=0)


def known_objects_index(triples: np.ndarray) -> Dict[Tuple[int, int], np.ndarray]:
    """Sorted true objects of every (subject, relation) pair occurring in ``triples``."""
    grouped: Dict[Tuple[int, int], Set[int]] = defaultdict(set)
    for s, r, o in np.asarray(triples, dtype=np.int64).reshape(-1, 3).tolist():
        grouped[(s, r)].add(o)
    return {key: np.array(sorted(objects), dtype=np.int64) for key, objects in grouped.items()}


def compute_stats(dataset: Dataset) -> DatasetStats:
    """In-degrees count non-augmented training triples per object entity."""
    num_entities = dataset.num_entities
    in_degrees = np.bincount(dataset.train[:, 2], minlength=num_entities) if num_entities else np.zeros(0, np.int64)
    if num_entities:
        average = float(in_degrees.sum()) / num_entities
        median = float(np.sort(in_degrees)[(num_entities - 1) // 2])
    else:
        average = median = 0.0
    return DatasetStats(
        num_entities=num_entities,
        num_relations=dataset.num_relations,
        num_train=len(dataset.train),
        num_valid=len(dataset.valid),
        num_test=len(dataset.test),
        average_in_degree=average,
        median_in_degree=median,
        in_degrees=in_degrees.tolist(),
    )


def _category(tphr: float, hptr: float) -> CategoryName:
    many_tails = tphr >= MANY_THRESHOLD
    many_heads = hptr >= MANY_THRESHOLD
    if many_tails and many_heads:
        return CategoryName.MANY_TO_MANY
    if many_tails:
        return CategoryName.ONE_TO_MANY
    if many_heads:
        return CategoryName.MANY_TO_ONE
    return CategoryName.ONE_TO_ONE


def categorize_relations(triples: np.ndarray) -> RelationCategories:
    """Classify each relation present in ``triples`` as 1-1, 1-N, N-1 or N-N."""
    heads: Dict[int, Set[int]] = defaultdict(set)
    tails: Dict[int, Set[int]] = defaultdict(set)
    counts: Dict[int, int] = defaultdict(int)
    for s, r, o in np.asarray(triples, dtype=np.int64).reshape(-1, 3).tolist():
        heads[r].add(s)
        tails[r].add(o)
        counts[r] += 1

    categories: RelationCategories = {}
    for relation in sorted(counts):
        tphr = counts[relation] / len(heads[relation])
        hptr = counts[relation] / len(tails[relation])
        categories[relation] = RelationCategory(category=_category(tphr, hptr), tphr=tphr, hptr=hptr)
    return categories


def corrupt_remove(dataset: Dataset, fraction: float, seed: int) -> Dataset:
    """Drop floor(fraction·|train|) training triples sampled uniformly without replacement."""
    if not 0.0 <= fraction <= 1.0:
        raise ConfigError(f"remove fraction must lie in [0, 1], got {fraction}")
    total = len(dataset.train)
    removed = math.floor(fraction * total)
    rng = np.random.default_rng(seed)
    keep = np.ones(total, dtype=bool)
    keep[rng.choice(total, size=removed, replace=False)] = False
    logger.info("dataset=%s removed=%d remaining=%d seed=%d", dataset.name, removed, int(keep.sum()), seed)
    return dataset.model_copy(update={"train": dataset.train[keep]})


def corrupt_add_noise(dataset: Dataset, fraction: float, seed: int) -> Dataset:
    """
    Append floor(fraction·|train|) random triples to train.

    Subject, relation and object are sampled independently and uniformly;
    triples already in any split or already generated are resampled.
    """
    if fraction < 0:
        raise ConfigError(f"noise fraction must be non-negative, got {fraction}")
    wanted = math.floor(fraction * len(dataset.train))
    if wanted == 0:
        return dataset.model_copy()
    num_entities, num_relations = dataset.num_entities, dataset.num_relations
    if num_entities == 0 or num_relations == 0:
        raise ConfigError("cannot add noise to a dataset with empty dictionaries")

    taken = set(map(tuple, dataset.all_triples().tolist()))
    absent = num_entities * num_entities * num_relations - len(taken)
    if wanted > absent:
        raise ConfigError(f"requested {wanted} noise triples but only {absent} absent triples exist")

    rng = np.random.default_rng(seed)
    added: List[Tuple[int, int, int]] = []
    while len(added) < wanted:
        draw = max(wanted - len(added), 64)
        candidates = np.stack([
            rng.integers(num_entities, size=draw),
            rng.integers(num_relations, size=draw),
            rng.integers(num_entities, size=draw),
        ], axis=1)
        for triple in map(tuple, candidates.tolist()):
            if triple in taken:
                continue
            taken.add(triple)
            added.append(triple)
            if len(added) == wanted:
                break
    logger.info("dataset=%s noise_added=%d seed=%d", dataset.name, wanted, seed)
    noise = np.asarray(added, dtype=np.int64).reshape(-1, 3)
    return dataset.model_copy(update={"train": np.concatenate([dataset.train, noise], axis=0)})


def _check_bounds(bounds: Sequence[int]) -> np.ndarray:
    edges = np.asarray(bounds, dtype=np.int64)
    if edges.size == 0 or np.any(np.diff(edges) <= 0):
        raise ConfigError(f"in-degree band edges must be strictly increasing, got {list(bounds)}")
    return edges


def band_labels(bounds: Sequence[int] = DEFAULT_INDEGREE_BOUNDS) -> List[str]:
    edges = _check_bounds(bounds).tolist()
    labels = [f"[{lo},{hi})" for lo, hi in zip(edges, edges[1:])]
    return labels + [f"[{edges[-1]},max]"]


def band_of(in_degrees: np.ndarray, bounds: Sequence[int] = DEFAULT_INDEGREE_BOUNDS) -> np.ndarray:
    """Half-open [lo, hi) bands; the last band is closed above and degrees below the first edge join band 0."""
    edges = _check_bounds(bounds)
    return np.clip(np.searchsorted(edges, np.asarray(in_degrees), side="right") - 1, 0, edges.size - 1)


def bucket_by_indegree(
    stats: DatasetStats,
    bounds: Sequence[int] = DEFAULT_INDEGREE_BOUNDS,
) -> Dict[int, int]:
    bands = band_of(np.asarray(stats.in_degrees, dtype=np.int64), bounds)
    return {entity: int(band) for entity, band in enumerate(bands.tolist())}


class DatasetService:
    """Resolves dataset locations and runs the corruption experiments end to end."""

    def __init__(self, data_root: Optional[str] = None):
        self.data_root = Path(data_root or settings.DATA_ROOT)

    def resolve(self, location: Union[str, Path]) -> Path:
        """A path as given when it exists, otherwise a directory of that name under the data root."""
        path = Path(location)
        if path.is_dir():
            return path
        candidate = self.data_root / path
        return candidate if candidate.is_dir() else path

    def load(self, location: Union[str, Path]) -> Dataset:
        return load_dataset(self.resolve(location))

    def corrupt(
        self,
        location: Union[str, Path],
        output: Union[str, Path],
        remove_fraction: float = 0.0,
        noise_fraction: float = 0.0,
        seed: int = 0,
    ) -> Dataset:
        dataset = self.load(location)
        dataset = corrupt_remove(dataset, remove_fraction, seed)
        dataset = corrupt_add_noise(dataset, noise_fraction, seed)
        save_dataset(dataset, output)
        return dataset

    def stats_report(self, dataset: Dataset) -> Dict[str, object]:
        stats = compute_stats(dataset)
        categories = categorize_relations(dataset.train)
        per_category: Dict[str, int] = {name.value: 0 for name in CategoryName}
        for category in categories.values():
            per_category[category.category.value] += 1
        return {
            "dataset": dataset.name,
            **stats.model_dump(exclude={"in_degrees"}),
            "average_in_degree": round(stats.average_in_degree, 2),
            "relation_categories": per_category,
            "relations": {
                dataset.relation_names[r]: category.model_dump(mode="json")
                for r, category in categories.items()
            },
        }
