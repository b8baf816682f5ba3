"""Dense tensor arithmetic with a reverse-mode differentiation tape."""
from .graph import ComputationGraph, backward, active_graph
from .tensor import Tensor
from . import ops
from .gradcheck import grad_check, grad_check_parameters

__all__ = [
    "ComputationGraph",
    "Tensor",
    "active_graph",
    "backward",
    "grad_check",
    "grad_check_parameters",
    "ops",
]
