"""Computation graph recorded during a forward pass and replayed in reverse."""
from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import InvariantViolation, ShapeError

if TYPE_CHECKING:
    from .tensor import Tensor

VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()


def active_graph() -> Optional["ComputationGraph"]:
    """The innermost graph entered on this thread, or None when not recording."""
    stack = getattr(_state, "stack", None)
    return stack[-1] if stack else None


@dataclass
class Node:
    node_id: int
    kind: str
    inputs: Tuple[int, ...]
    output: "Tensor"
    vjp: Optional[VJP] = None


class ComputationGraph:
    """
    Tape of differentiable operations.

    Nodes are appended in execution order, so every node's inputs precede it.
    Tensors that require a gradient but were not produced on this tape are
    registered as leaf nodes the first time an operation consumes them.
    Inputs that do not require a gradient are stored with id ``-1``.
    """

    def __init__(self) -> None:
        self.nodes: List[Node] = []
        self._leaves: Dict[int, int] = {}

    def __enter__(self) -> "ComputationGraph":
        stack = getattr(_state, "stack", None)
        if stack is None:
            stack = _state.stack = []
        stack.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _state.stack.pop()

    def __len__(self) -> int:
        return len(self.nodes)

    def node_id_of(self, tensor: "Tensor") -> Optional[int]:
        owner = tensor._graph
        if owner is not None and owner() is self:
            return tensor.node_id
        return self._leaves.get(id(tensor))

    def _ensure_leaf(self, tensor: "Tensor") -> int:
        node_id = self.node_id_of(tensor)
        if node_id is None:
            node_id = len(self.nodes)
            self.nodes.append(Node(node_id, "leaf", (), tensor))
            self._leaves[id(tensor)] = node_id
        return node_id

    def record(self, kind: str, inputs: Sequence["Tensor"], output: "Tensor", vjp: VJP) -> None:
        input_ids = tuple(self._ensure_leaf(t) if t.requires_grad else -1 for t in inputs)
        node_id = len(self.nodes)
        self.nodes.append(Node(node_id, kind, input_ids, output, vjp))
        output.node_id = node_id
        output._graph = weakref.ref(self)

    def release(self) -> None:
        """Drop the recorded nodes. Leaf lookups through :meth:`gradient` stop working afterwards."""
        self.nodes.clear()
        self._leaves.clear()

    def backward(self, loss: "Tensor") -> Dict[int, "Tensor"]:
        """
        Reverse-topological accumulation of chain-rule contributions.

        Returns a gradient for every node that requires one; nodes with no path
        to ``loss`` get zeros. The tape is not modified, so repeated calls
        return identical maps.
        """
        from .tensor import Tensor

        if loss.values.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        loss_id = self.node_id_of(loss)
        if loss_id is None:
            raise InvariantViolation("loss was not recorded on this graph")

        pending: Dict[int, np.ndarray] = {loss_id: np.ones(loss.shape, dtype=loss.dtype)}
        for node in reversed(self.nodes[: loss_id + 1]):
            upstream = pending.get(node.node_id)
            if upstream is None or node.vjp is None:
                continue
            for input_id, contribution in zip(node.inputs, node.vjp(upstream)):
                if input_id < 0 or contribution is None:
                    continue
                if input_id in pending:
                    pending[input_id] = pending[input_id] + contribution
                else:
                    pending[input_id] = contribution

        gradients: Dict[int, Tensor] = {}
        for node in self.nodes:
            if not node.output.requires_grad:
                continue
            grad = pending.get(node.node_id)
            if grad is None:
                grad = np.zeros_like(node.output.values)
            gradients[node.node_id] = Tensor(np.asarray(grad, dtype=node.output.dtype))
        return gradients

    def gradient(self, gradients: Dict[int, "Tensor"], tensor: "Tensor") -> np.ndarray:
        """Gradient array for ``tensor`` out of a map returned by :meth:`backward`."""
        node_id = self.node_id_of(tensor)
        if node_id is None or node_id not in gradients:
            return np.zeros_like(tensor.values)
        return gradients[node_id].values


def backward(graph: ComputationGraph, loss: "Tensor") -> Dict[int, "Tensor"]:
    return graph.backward(loss)
