from typing import Sequence

import numpy as np

from .tensor import Tensor


def _fans(shape: Sequence[int]):
    if len(shape) == 2:
        return shape[1], shape[0]
    receptive = int(np.prod(shape[2:])) if len(shape) > 2 else 1
    return shape[1] * receptive, shape[0] * receptive


def glorot_uniform(shape: Sequence[int], rng: np.random.Generator, dtype=np.float32) -> Tensor:
    """Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); a trainable leaf."""
    fan_in, fan_out = _fans(tuple(shape))
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=tuple(shape)).astype(dtype), requires_grad=True)


def full(shape: Sequence[int], value: float, dtype=np.float32) -> Tensor:
    return Tensor(np.full(tuple(shape), value, dtype=dtype), requires_grad=True)
