from __future__ import annotations

import weakref
from typing import Any, Optional, Tuple, Union

import numpy as np

from .graph import ComputationGraph

Scalar = Union[int, float]


class Tensor:
    """
    Dense row-major array with an optional gradient slot on a ComputationGraph.

    ``node_id`` is set when the tensor is the output of a recorded operation;
    parameters get their identity from the graph that consumes them.
    """

    __slots__ = ("values", "requires_grad", "node_id", "_graph")

    def __init__(self, values: Any, requires_grad: bool = False, dtype: Optional[np.dtype] = None) -> None:
        array = np.asarray(values, dtype=dtype)
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(np.float64)
        self.values: np.ndarray = array
        self.requires_grad = requires_grad
        self.node_id: Optional[int] = None
        self._graph: Optional["weakref.ReferenceType[ComputationGraph]"] = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    def __len__(self) -> int:
        return self.values.shape[0]

    def item(self) -> float:
        return float(self.values.reshape(-1)[0])

    # Arithmetic dispatches to the recorded operations
    def __add__(self, other: Union["Tensor", Scalar]) -> "Tensor":
        return _ops.add(self, other)

    def __radd__(self, other: Scalar) -> "Tensor":
        return _ops.add(self, other)

    def __sub__(self, other: Union["Tensor", Scalar]) -> "Tensor":
        return _ops.sub(self, other)

    def __rsub__(self, other: Scalar) -> "Tensor":
        return _ops.sub(_ops.constant(other, like=self), self)

    def __mul__(self, other: Union["Tensor", Scalar]) -> "Tensor":
        return _ops.mul(self, other)

    def __rmul__(self, other: Scalar) -> "Tensor":
        return _ops.mul(self, other)

    def __truediv__(self, other: Union["Tensor", Scalar]) -> "Tensor":
        return _ops.div(self, other)

    def __neg__(self) -> "Tensor":
        return _ops.neg(self)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return _ops.matmul(self, other)

    @property
    def T(self) -> "Tensor":
        return _ops.transpose(self)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return _ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None) -> "Tensor":
        return _ops.mean(self, axis=axis)

    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return _ops.reshape(self, shape)


from . import ops as _ops  # noqa: E402
