"""
Checkpoint container.

Layout: the 8-byte magic ``KRACLCKP``, a little-endian u32 format version,
a little-endian u64 header length, the JSON header, then an ``.npz`` payload
holding one block per parameter (``param/<name>``) and optimizer moment
(``adam_m/<name>``, ``adam_v/<name>``).
"""
import io
import logging
import struct
import zipfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ..core.errors import CheckpointError
from ..models.training import CHECKPOINT_VERSION, Checkpoint, TrainConfig

logger = logging.getLogger(__name__)

MAGIC = b"KRACLCKP"
_PREAMBLE = struct.Struct("<8sIQ")
PARAM_PREFIX = "param/"


class CheckpointHeader(BaseModel):
    model_config = {"ser_json_inf_nan": "constants"}

    config: TrainConfig
    epoch: int
    optimizer_step: int
    seed_state: Dict[str, Any] = Field(default_factory=dict)
    best_valid_mrr: Optional[float] = None
    loss_history: List[float] = Field(default_factory=list)
    entity_names: List[str] = Field(default_factory=list)
    relation_names: List[str] = Field(default_factory=list)
    blocks: List[str] = Field(default_factory=list)


def save_checkpoint(ckpt: Checkpoint, path: Union[str, Path]) -> Path:
    path = Path(path)
    blocks = {f"{PARAM_PREFIX}{name}": array for name, array in ckpt.parameters.items()}
    blocks.update(ckpt.optimizer_moments)
    header = CheckpointHeader(
        config=ckpt.config,
        epoch=ckpt.epoch,
        optimizer_step=ckpt.optimizer_step,
        seed_state=ckpt.seed_state,
        best_valid_mrr=ckpt.best_valid_mrr,
        loss_history=ckpt.loss_history,
        entity_names=ckpt.entity_names,
        relation_names=ckpt.relation_names,
        blocks=sorted(blocks),
    ).model_dump_json().encode("utf-8")

    payload = io.BytesIO()
    np.savez(payload, **blocks)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(_PREAMBLE.pack(MAGIC, ckpt.format_version, len(header)))
        handle.write(header)
        handle.write(payload.getvalue())
    logger.info("checkpoint saved path=%s blocks=%d epoch=%d", path, len(blocks), ckpt.epoch)
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    data = path.read_bytes()
    if len(data) < _PREAMBLE.size:
        raise CheckpointError(f"{path}: truncated checkpoint")
    magic, version, header_length = _PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: not a kracl checkpoint")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: format version {version}, expected {CHECKPOINT_VERSION}")
    start = _PREAMBLE.size
    try:
        header = CheckpointHeader.model_validate_json(data[start:start + header_length])
    except ValidationError as exc:
        raise CheckpointError(f"{path}: malformed header: {exc}") from exc

    try:
        with np.load(io.BytesIO(data[start + header_length:]), allow_pickle=False) as archive:
            blocks = {name: archive[name] for name in archive.files}
    except (OSError, ValueError, EOFError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"{path}: unreadable parameter payload") from exc
    if sorted(blocks) != header.blocks:
        raise CheckpointError(f"{path}: payload blocks do not match the header")

    return Checkpoint(
        format_version=version,
        config=header.config,
        parameters={
            name[len(PARAM_PREFIX):]: array for name, array in blocks.items() if name.startswith(PARAM_PREFIX)
        },
        optimizer_moments={name: array for name, array in blocks.items() if not name.startswith(PARAM_PREFIX)},
        optimizer_step=header.optimizer_step,
        epoch=header.epoch,
        seed_state=header.seed_state,
        best_valid_mrr=header.best_valid_mrr,
        loss_history=header.loss_history,
        entity_names=header.entity_names,
        relation_names=header.relation_names,
    )
