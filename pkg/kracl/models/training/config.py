from enum import Enum
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..encoder import OPERATOR_ORDER, Operator, canonical_operators
from ..objective import LossConfig
from ..scoring import HeadKind


class TieMode(str, Enum):
    STRICT = "strict"  # only strictly higher scores rank above the gold entity
    PESSIMISTIC = "pessimistic"  # ties count against the gold entity


# Per-dataset hyperparameter rows; keys are lower-cased dataset directory names
DATASET_PRESETS: Dict[str, Dict[str, Any]] = {
    "fb15k-237": dict(batch_size=2048, learning_rate=1e-3, epochs=1500, gnn_layers=1, encoder_dropout=0.1, temperature=0.07),
    "wn18rr": dict(batch_size=2048, learning_rate=1e-3, epochs=1000, gnn_layers=2, encoder_dropout=0.2, temperature=0.07),
    "nell-995": dict(batch_size=2048, learning_rate=1e-3, epochs=1000, gnn_layers=2, encoder_dropout=0.2, temperature=0.07),
    "kinship": dict(batch_size=1024, learning_rate=3e-4, epochs=1000, gnn_layers=2, encoder_dropout=0.2, temperature=0.1),
    "umls": dict(batch_size=1024, learning_rate=5e-4, epochs=1000, gnn_layers=2, encoder_dropout=0.2, temperature=0.1),
}


class TrainConfig(BaseModel):
    """
    One training run. Unset hyperparameters take the preset row of the
    dataset named by the last component of ``dataset``; the field defaults
    are the Kinship row.
    """
    dataset: str
    dim: int = Field(200, gt=0)
    batch_size: int = Field(1024, gt=0)
    learning_rate: float = Field(3e-4, gt=0)
    epochs: int = Field(1000, ge=0)
    gnn_layers: int = Field(2, ge=0)
    encoder_dropout: float = Field(0.2, ge=0, lt=1)
    temperature: float = Field(0.1, gt=0)
    head_kind: HeadKind = HeadKind.CONVE
    operators: Tuple[Operator, ...] = OPERATOR_ORDER

    # Ablations
    no_krat: bool = False
    uniform_attention: bool = False
    no_residual: bool = False
    no_cl: bool = False
    no_ce: bool = False
    bce_mode: bool = False

    seed: int = 0
    weight_decay: float = Field(0.01, ge=0)
    eval_every: int = Field(25, gt=0)

    precision: Literal["float32", "float64"] = "float32"
    tie_mode: TieMode = TieMode.STRICT
    leaky_slope: float = 0.2
    head_dropout: float = Field(0.2, ge=0, lt=1)
    conv_filters: int = Field(32, gt=0)
    conv_kernel: int = Field(3, gt=0)
    conv_reshape_width: int = Field(10, gt=0)
    label_smoothing: float = Field(0.0, ge=0, lt=1)
    grad_clip_norm: Optional[float] = Field(None, gt=0)
    lr_schedule: Literal["constant", "cosine"] = "constant"

    model_config = {"extra": "forbid"}

    @model_validator(mode="before")
    @classmethod
    def _apply_preset(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "dataset" not in data:
            return data
        preset = DATASET_PRESETS.get(Path(str(data["dataset"])).name.lower(), {})
        return {**preset, **data}

    @field_validator("head_kind", mode="before")
    @classmethod
    def _parse_head(cls, value: Any) -> Any:
        return HeadKind.parse(value) if isinstance(value, str) else value

    @field_validator("operators", mode="before")
    @classmethod
    def _parse_operators(cls, value: Any) -> Any:
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        operators = [Operator.parse(v) if isinstance(v, str) else v for v in value]
        if not operators:
            raise ValueError("operator subset must not be empty")
        return canonical_operators(operators)

    @model_validator(mode="after")
    def _check_objective(self) -> "TrainConfig":
        if not self.bce_mode and self.no_cl and self.no_ce:
            raise ValueError("no_cl and no_ce together leave no training objective")
        if self.head_kind is HeadKind.CONVE and self.dim % self.conv_reshape_width:
            raise ValueError(f"conv_reshape_width {self.conv_reshape_width} does not divide dim {self.dim}")
        return self

    @property
    def effective_layers(self) -> int:
        return 0 if self.no_krat else self.gnn_layers

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.precision)

    def loss_config(self) -> LossConfig:
        return LossConfig(
            temperature=self.temperature,
            use_cl=not self.no_cl,
            use_ce=not self.no_ce,
            bce_mode=self.bce_mode,
            label_smoothing=self.label_smoothing,
        )
