"""Plain-text export of final-layer embeddings with their id↔name mapping."""
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel

from ...core.errors import DatasetParseError
from ...models.dataset import Dataset
from ...models.training import Checkpoint
from ..data import DatasetService
from ..model import KraclModel

logger = logging.getLogger(__name__)

HEADER = "#kracl-embeddings 1"
INVERSE_SUFFIX = "_inv"


class EmbeddingTable(BaseModel):
    model_config = {"arbitrary_types_allowed": True}

    names: List[str]
    vectors: np.ndarray


def _format_row(index: int, name: str, vector: np.ndarray) -> str:
    # repr of a python float is the shortest string that parses back to the same value
    return f"{index}\t{name}\t{' '.join(repr(float(v)) for v in vector)}\n"


def write_embeddings(
    path: Union[str, Path],
    entity_names: List[str],
    entities: np.ndarray,
    relation_names: List[str],
    relations: np.ndarray,
) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(HEADER + "\n")
        for section, names, matrix in (("entities", entity_names, entities), ("relations", relation_names, relations)):
            handle.write(f"[{section}] {matrix.shape[0]} {matrix.shape[1]}\n")
            for index, (name, vector) in enumerate(zip(names, matrix)):
                handle.write(_format_row(index, name, vector))
    return path


def export_embeddings(ckpt: Checkpoint, path: Union[str, Path], dataset: Optional[Dataset] = None) -> Path:
    """Encode the training graph once with frozen parameters and write both final tables."""
    dataset = dataset or DatasetService().load(ckpt.config.dataset)
    entities, relations = KraclModel.from_checkpoint(ckpt, dataset).encode(train_mode=False)
    relation_names = list(dataset.relation_names) + [name + INVERSE_SUFFIX for name in dataset.relation_names]
    path = write_embeddings(path, dataset.entity_names, entities.values, relation_names, relations.values)
    logger.info("exported path=%s entities=%d relations=%d", path, entities.shape[0], relations.shape[0])
    return path


def _section(lines: List[str], position: int, expected: str, path: str) -> Tuple[EmbeddingTable, int]:
    fields = lines[position].split() if position < len(lines) else []
    if len(fields) != 3 or fields[0] != f"[{expected}]" or not (fields[1].isdigit() and fields[2].isdigit()):
        raise DatasetParseError(path, position + 1, f"expected a [{expected}] section header")
    count, dim = int(fields[1]), int(fields[2])
    names: List[str] = []
    vectors = np.zeros((count, dim), dtype=np.float64)
    for row in range(count):
        line_number = position + row + 2
        if line_number > len(lines):
            raise DatasetParseError(path, line_number, f"[{expected}] ends after {row} of {count} rows")
        parts = lines[line_number - 1].split("\t")
        values = parts[2].split() if len(parts) == 3 else []
        if len(parts) != 3 or parts[0] != str(row) or len(values) != dim:
            raise DatasetParseError(path, line_number, f"malformed [{expected}] row")
        names.append(parts[1])
        vectors[row] = [float(v) for v in values]
    return EmbeddingTable(names=names, vectors=vectors), position + count + 1


def parse_embeddings(path: Union[str, Path]) -> Tuple[EmbeddingTable, EmbeddingTable]:
    """Read back a file written by :func:`export_embeddings` as (entities, relations)."""
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle]
    if not lines or lines[0] != HEADER:
        raise DatasetParseError(str(path), 1, f"missing {HEADER!r} header")
    entities, position = _section(lines, 1, "entities", str(path))
    relations, _ = _section(lines, position, "relations", str(path))
    return entities, relations
