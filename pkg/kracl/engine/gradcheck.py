"""Central finite-difference checks of the recorded gradients."""
from typing import Callable, Sequence, Union

import numpy as np

from .graph import ComputationGraph
from .tensor import Tensor


def _relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    if analytic.size == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))))


def grad_check(
    f: Callable[[Tensor], Tensor],
    x: Union[Tensor, np.ndarray],
    eps: float = 1e-5,
) -> float:
    """
    Max over coordinates of |analytic - central difference| / max(1, |analytic|).

    ``x`` is copied to double precision; ``f`` must map a tensor to a scalar tensor.
    """
    base = np.array(x.values if isinstance(x, Tensor) else x, dtype=np.float64)
    point = Tensor(base.copy(), requires_grad=True)
    with ComputationGraph() as graph:
        loss = f(point)
    analytic = graph.gradient(graph.backward(loss), point)

    numeric = np.zeros_like(base)
    flat = base.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + eps
        plus = f(Tensor(base)).item()
        flat[i] = original - eps
        minus = f(Tensor(base)).item()
        flat[i] = original
        numeric.flat[i] = (plus - minus) / (2.0 * eps)
    return _relative_error(analytic, numeric)


def grad_check_parameters(
    loss_fn: Callable[[], Tensor],
    parameters: Sequence[Tensor],
    eps: float = 1e-5,
) -> float:
    """
    Same measure as :func:`grad_check`, taken jointly over several parameter
    tensors that ``loss_fn`` closes over. Parameters are perturbed in place
    and restored; they should already hold double-precision values.
    """
    with ComputationGraph() as graph:
        loss = loss_fn()
    gradients = graph.backward(loss)

    worst = 0.0
    for parameter in parameters:
        analytic = graph.gradient(gradients, parameter)
        numeric = np.zeros_like(parameter.values)
        flat = parameter.values.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = loss_fn().item()
            flat[i] = original - eps
            minus = loss_fn().item()
            flat[i] = original
            numeric.flat[i] = (plus - minus) / (2.0 * eps)
        worst = max(worst, _relative_error(analytic, numeric))
    return worst
