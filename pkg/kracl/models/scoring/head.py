from enum import Enum
from typing import List, Optional, Tuple

from ...core.errors import ConfigError
from ...engine import Tensor
from ..base import ArrayModel


class HeadKind(str, Enum):
    TRANSE = "TransE"
    DISTMULT = "DistMult"
    ROTATE = "RotatE"
    CONVE = "ConvE"

    @classmethod
    def parse(cls, name: str) -> "HeadKind":
        for member in cls:
            if member.value.lower() == str(name).strip().lower():
                return member
        raise ConfigError(f"unknown projection head {name!r}")


class HeadParams(ArrayModel):
    """
    Knowledge projection head. Only ConvE carries weights; the others are
    parameter-free and leave every optional field unset.
    """
    kind: HeadKind
    dim: int
    filters: Optional[Tensor] = None  # C_out×1×kh×kw
    projection: Optional[Tensor] = None  # flattened conv size × d
    conv_slope: Optional[Tensor] = None
    out_slope: Optional[Tensor] = None
    reshape_width: int = 10
    reshape_height: int = 20
    dropout: float = 0.2

    @property
    def image_shape(self) -> Tuple[int, int]:
        """Subject and relation grids stacked along the height axis."""
        return 2 * self.reshape_width, self.reshape_height

    def validate_dimensions(self) -> None:
        if self.kind is HeadKind.ROTATE and self.dim % 2:
            raise ConfigError(f"RotatE needs an even dimension, got {self.dim}")
        if self.kind is not HeadKind.CONVE:
            return
        if self.reshape_width * self.reshape_height != self.dim:
            raise ConfigError(
                f"ConvE reshape {self.reshape_width}×{self.reshape_height} does not cover dimension {self.dim}"
            )
        if self.filters is None or self.projection is None or self.conv_slope is None or self.out_slope is None:
            raise ConfigError("ConvE head is missing weights")
        _, _, kh, kw = self.filters.shape
        height, width = self.image_shape
        flat = self.filters.shape[0] * (height - kh + 1) * (width - kw + 1)
        if self.projection.shape != (flat, self.dim):
            raise ConfigError(f"projection has shape {self.projection.shape}, expected {(flat, self.dim)}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"head dropout must lie in [0, 1), got {self.dropout}")

    def tensors(self) -> List[Tuple[str, Tensor]]:
        names = ("filters", "projection", "conv_slope", "out_slope")
        return [(name, getattr(self, name)) for name in names if getattr(self, name) is not None]
