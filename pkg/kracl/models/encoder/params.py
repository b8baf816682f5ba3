from enum import Enum
from typing import List, Sequence, Tuple

from pydantic import Field

from ...core.errors import ConfigError
from ...engine import Tensor
from ..base import ArrayModel


class Operator(str, Enum):
    SUB = "Sub"
    MULT = "Mult"
    ROT = "Rot"
    CORR = "Corr"

    @classmethod
    def parse(cls, name: str) -> "Operator":
        for member in cls:
            if member.value.lower() == name.strip().lower():
                return member
        raise ConfigError(f"unknown composition operator {name!r}")


# Message blocks are always concatenated in this order
OPERATOR_ORDER: Tuple[Operator, ...] = (Operator.SUB, Operator.MULT, Operator.ROT, Operator.CORR)


def canonical_operators(operators: Sequence[Operator]) -> Tuple[Operator, ...]:
    chosen = set(operators)
    return tuple(op for op in OPERATOR_ORDER if op in chosen)


class EmbeddingTables(ArrayModel):
    """Layer-0 entity rows (|E|×d) and relation rows (2|R|×d, inverses appended)."""
    entity: Tensor
    relation: Tensor

    @property
    def dim(self) -> int:
        return self.entity.shape[1]


class KratLayerParams(ArrayModel):
    operators: Tuple[Operator, ...]
    operator_weights: List[Tensor] = Field(description="W_i, one d×d matrix per operator")
    w_agg: Tensor = Field(description="d × n·d aggregation matrix")
    w_res: Tensor = Field(description="d×d residual matrix")
    w_att: Tensor = Field(description="d × 3d attention projection")
    attention: Tensor = Field(description="1×d attention vector a")
    w_rel: Tensor = Field(description="d×d relation transform")
    negative_slope: float = 0.2
    dropout: float = 0.0
    uniform_attention: bool = False
    residual: bool = True

    @property
    def dim(self) -> int:
        return self.w_res.shape[0]

    def validate_dimensions(self) -> None:
        d = self.dim
        n = len(self.operators)
        if not 1 <= n <= len(OPERATOR_ORDER) or len(set(self.operators)) != n:
            raise ConfigError(f"operator subset must hold 1..4 distinct operators, got {self.operators}")
        if len(self.operator_weights) != n:
            raise ConfigError(f"{n} operators but {len(self.operator_weights)} operator matrices")
        expected = {
            "w_agg": (d, n * d),
            "w_res": (d, d),
            "w_att": (d, 3 * d),
            "attention": (1, d),
            "w_rel": (d, d),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ConfigError(f"{name} has shape {actual}, expected {shape}")
        for weight in self.operator_weights:
            if weight.shape != (d, d):
                raise ConfigError(f"operator matrix has shape {weight.shape}, expected {(d, d)}")
        if Operator.ROT in self.operators and d % 2:
            raise ConfigError(f"Rot needs an even dimension, got {d}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout rate must lie in [0, 1), got {self.dropout}")

    def tensors(self) -> List[Tuple[str, Tensor]]:
        named = [(f"w_op.{op.value}", w) for op, w in zip(self.operators, self.operator_weights)]
        named += [(name, getattr(self, name)) for name in ("w_agg", "w_res", "w_att", "attention", "w_rel")]
        return named
