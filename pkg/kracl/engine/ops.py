"""
Differentiable operations over :class:`Tensor`.

Every operation computes its result eagerly with numpy and, when a graph is
active and an input requires a gradient, records a vector-Jacobian product on
that graph. Reductions that scatter into rows use ``numpy.add.at``, which
accumulates in index order and so gives a fixed summation order.
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core.errors import ConfigError, DimensionError, DomainError, SegmentIndexError
from .graph import active_graph
from .tensor import Tensor

Operand = Union[Tensor, int, float, np.ndarray]


def constant(value: Operand, like: Tensor) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=like.dtype))


def _emit(kind: str, inputs: Sequence[Tensor], values: np.ndarray, vjp: Callable) -> Tensor:
    out = Tensor(values)
    graph = active_graph()
    if graph is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        graph.record(kind, inputs, out, vjp)
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_pair(x: Operand, y: Operand) -> Tuple[Tensor, Tensor]:
    if not isinstance(x, Tensor):
        x = constant(x, like=y)
    y = constant(y, like=x)
    try:
        np.broadcast_shapes(x.shape, y.shape)
    except ValueError:
        raise DimensionError(f"cannot broadcast shapes {x.shape} and {y.shape}") from None
    return x, y


def _check_segments(segment_of: np.ndarray, count: int, num_segments: int) -> np.ndarray:
    segment_of = np.asarray(segment_of, dtype=np.int64)
    if segment_of.shape != (count,):
        raise DimensionError(f"expected {count} segment ids, got shape {segment_of.shape}")
    if count and (segment_of.min() < 0 or segment_of.max() >= num_segments):
        raise SegmentIndexError(f"segment id out of range [0, {num_segments})")
    return segment_of


# ---------------------------------------------------------------------------
# Linear algebra and arithmetic
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shapes {a.shape} and {b.shape} do not align")

    def vjp(g):
        return g @ b.values.T, a.values.T @ g

    return _emit("matmul", (a, b), a.values @ b.values, vjp)


def add(x: Operand, y: Operand) -> Tensor:
    x, y = _broadcast_pair(x, y)

    def vjp(g):
        return _unbroadcast(g, x.shape), _unbroadcast(g, y.shape)

    return _emit("add", (x, y), x.values + y.values, vjp)


def sub(x: Operand, y: Operand) -> Tensor:
    x, y = _broadcast_pair(x, y)

    def vjp(g):
        return _unbroadcast(g, x.shape), _unbroadcast(-g, y.shape)

    return _emit("sub", (x, y), x.values - y.values, vjp)


def mul(x: Operand, y: Operand) -> Tensor:
    x, y = _broadcast_pair(x, y)

    def vjp(g):
        return _unbroadcast(g * y.values, x.shape), _unbroadcast(g * x.values, y.shape)

    return _emit("mul", (x, y), x.values * y.values, vjp)


def div(x: Operand, y: Operand) -> Tensor:
    x, y = _broadcast_pair(x, y)

    def vjp(g):
        return (
            _unbroadcast(g / y.values, x.shape),
            _unbroadcast(-g * x.values / (y.values * y.values), y.shape),
        )

    return _emit("div", (x, y), x.values / y.values, vjp)


def neg(x: Tensor) -> Tensor:
    return _emit("neg", (x,), -x.values, lambda g: (-g,))


# ---------------------------------------------------------------------------
# Pointwise non-linearities
# ---------------------------------------------------------------------------

def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.values)
    return _emit("tanh", (x,), y, lambda g: (g * (1.0 - y * y),))


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    scale = np.where(x.values > 0, 1.0, slope).astype(x.dtype)
    return _emit("leaky_relu", (x,), x.values * scale, lambda g: (g * scale,))


def prelu(x: Tensor, slope: Tensor) -> Tensor:
    """Parametric ReLU with a learnable scalar slope."""
    positive = x.values > 0
    scale = np.where(positive, 1.0, slope.values.reshape(())).astype(x.dtype)

    def vjp(g):
        negative_part = np.where(positive, 0.0, x.values)
        return g * scale, np.asarray(np.sum(g * negative_part), dtype=slope.dtype).reshape(slope.shape)

    return _emit("prelu", (x, slope), x.values * scale, vjp)


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.values)
    return _emit("exp", (x,), y, lambda g: (g * y,))


def log(x: Tensor) -> Tensor:
    if np.any(x.values <= 0):
        raise DomainError("log of a non-positive value")
    return _emit("log", (x,), np.log(x.values), lambda g: (g / x.values,))


def _sigmoid(values: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -values))


def sigmoid(x: Tensor) -> Tensor:
    y = _sigmoid(x.values)
    return _emit("sigmoid", (x,), y, lambda g: (g * y * (1.0 - y),))


def softplus(x: Tensor) -> Tensor:
    """log(1 + exp(x)), evaluated without overflow."""
    return _emit("softplus", (x,), np.logaddexp(0.0, x.values), lambda g: (g * _sigmoid(x.values),))


def l2_normalize_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    norms = np.maximum(np.sqrt(np.sum(x.values * x.values, axis=-1, keepdims=True)), eps)
    y = x.values / norms

    def vjp(g):
        return ((g - y * np.sum(g * y, axis=-1, keepdims=True)) / norms,)

    return _emit("l2_normalize_rows", (x,), y, vjp)


def dropout(
    x: Tensor,
    rate: float,
    seed: Union[int, np.random.Generator, None] = None,
    train_mode: bool = True,
) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1-rate) so evaluation needs no rescale."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    if not train_mode or rate == 0.0:
        return x
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    mask = (rng.random(x.shape) >= rate).astype(x.dtype) / x.dtype.type(1.0 - rate)
    return _emit("dropout", (x,), x.values * mask, lambda g: (g * mask,))


_UNARY = {
    "tanh": tanh,
    "exp": exp,
    "log": log,
    "sigmoid": sigmoid,
    "softplus": softplus,
    "l2_normalize_rows": l2_normalize_rows,
    "leaky_relu": leaky_relu,
    "dropout": dropout,
}
_BINARY = {"add": add, "sub": sub, "mul": mul, "div": div, "prelu": prelu}


def elementwise(op_kind: str, x: Tensor, y: Optional[Tensor] = None, **params) -> Tensor:
    """Dispatch an elementwise operation by name, e.g. ``elementwise("leaky_relu", x, slope=0.2)``."""
    if op_kind in _BINARY:
        if y is None:
            raise ConfigError(f"{op_kind} needs a second operand")
        return _BINARY[op_kind](x, y)
    if op_kind in _UNARY:
        return _UNARY[op_kind](x, **params)
    raise ConfigError(f"unknown elementwise operation {op_kind!r}")


# ---------------------------------------------------------------------------
# Shape manipulation and reductions
# ---------------------------------------------------------------------------

def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        y = x.values.reshape(tuple(shape))
    except ValueError:
        raise DimensionError(f"cannot reshape {x.shape} into {tuple(shape)}") from None
    return _emit("reshape", (x,), y, lambda g: (g.reshape(x.shape),))


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    axes = tuple(axes) if axes is not None else tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(axes))
    return _emit("transpose", (x,), x.values.transpose(axes), lambda g: (g.transpose(inverse),))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = list(tensors)
    try:
        values = np.concatenate([t.values for t in tensors], axis=axis)
    except ValueError as exc:
        raise DimensionError(f"cannot concatenate shapes {[t.shape for t in tensors]}") from exc
    offsets = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def vjp(g):
        return np.split(g, offsets, axis=axis)

    return _emit("concat", tensors, values, vjp)


def sum(x: Tensor, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape),)

    return _emit("sum", (x,), np.sum(x.values, axis=axis, keepdims=keepdims), vjp)


def mean(x: Tensor, axis: Optional[int] = None) -> Tensor:
    count = x.size if axis is None else x.shape[axis]
    return mul(sum(x, axis=axis), 1.0 / max(count, 1))


def gather_rows(x: Tensor, index: np.ndarray) -> Tensor:
    """Rows of ``x`` selected by an integer index; gradients scatter-add back."""
    index = np.asarray(index, dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= x.shape[0]):
        raise SegmentIndexError(f"row index out of range [0, {x.shape[0]})")

    def vjp(g):
        grad = np.zeros_like(x.values)
        np.add.at(grad, index, g)
        return (grad,)

    return _emit("gather_rows", (x,), x.values[index], vjp)


def softmax_rows(x: Tensor) -> Tensor:
    shifted = x.values - np.max(x.values, axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / np.sum(e, axis=-1, keepdims=True)

    def vjp(g):
        return (y * (g - np.sum(g * y, axis=-1, keepdims=True)),)

    return _emit("softmax_rows", (x,), y, vjp)


# ---------------------------------------------------------------------------
# Graph reductions
# ---------------------------------------------------------------------------

def segment_weighted_sum(
    messages: Tensor,
    weights: Tensor,
    segment_of: np.ndarray,
    num_segments: int,
) -> Tensor:
    """Row i of the result is the weight-scaled sum of message rows in segment i."""
    count = messages.shape[0]
    if messages.ndim != 2 or weights.shape != (count,):
        raise DimensionError(f"messages {messages.shape} and weights {weights.shape} do not align")
    segment_of = _check_segments(segment_of, count, num_segments)
    out = np.zeros((num_segments, messages.shape[1]), dtype=messages.dtype)
    np.add.at(out, segment_of, messages.values * weights.values[:, None])

    def vjp(g):
        rows = g[segment_of]
        return rows * weights.values[:, None], np.sum(rows * messages.values, axis=1)

    return _emit("segment_weighted_sum", (messages, weights), out, vjp)


def softmax_segments(
    scores: Tensor,
    segment_of: np.ndarray,
    num_segments: Optional[int] = None,
) -> Tensor:
    """Softmax computed independently within each segment, with per-segment max subtraction."""
    count = scores.shape[0] if scores.ndim else 0
    if count == 0:
        return Tensor(np.zeros((0,), dtype=scores.dtype))
    if num_segments is None:
        num_segments = int(np.max(segment_of)) + 1
    segment_of = _check_segments(segment_of, count, num_segments)

    peak = np.full(num_segments, -np.inf, dtype=scores.dtype)
    np.maximum.at(peak, segment_of, scores.values)
    e = np.exp(scores.values - peak[segment_of])
    totals = np.zeros(num_segments, dtype=scores.dtype)
    np.add.at(totals, segment_of, e)
    y = e / totals[segment_of]

    def vjp(g):
        gy = g * y
        sums = np.zeros(num_segments, dtype=g.dtype)
        np.add.at(sums, segment_of, gy)
        return (gy - y * sums[segment_of],)

    return _emit("softmax_segments", (scores,), y, vjp)


# ---------------------------------------------------------------------------
# Convolution and composition kernels
# ---------------------------------------------------------------------------

def conv2d(x: Tensor, filters: Tensor) -> Tensor:
    """
    Valid, stride-1 cross-correlation (no kernel flip).

    ``x`` is C_in×H×W or batched B×C_in×H×W; ``filters`` is C_out×C_in×kh×kw.
    """
    batched = x.ndim == 4
    if x.ndim not in (3, 4) or filters.ndim != 4:
        raise DimensionError(f"conv2d expects [B×]C×H×W input and 4-d filters, got {x.shape} and {filters.shape}")
    images = x.values if batched else x.values[None]
    _, channels, height, width = images.shape
    out_channels, in_channels, kh, kw = filters.shape
    if in_channels != channels:
        raise DimensionError(f"filters expect {in_channels} channels, input has {channels}")
    if kh > height or kw > width:
        raise DimensionError(f"kernel {kh}×{kw} larger than input {height}×{width}")

    windows = sliding_window_view(images, (kh, kw), axis=(2, 3))  # B×C×Ho×Wo×kh×kw
    out = np.tensordot(windows, filters.values, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    out_h, out_w = out.shape[2], out.shape[3]

    def vjp(g):
        grads = g if batched else g[None]
        grad_filters = np.tensordot(grads, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_images = np.zeros_like(images)
        for i in range(kh):
            for j in range(kw):
                grad_images[:, :, i:i + out_h, j:j + out_w] += np.einsum(
                    "bohw,oc->bchw", grads, filters.values[:, :, i, j]
                )
        return (grad_images if batched else grad_images[0]), grad_filters

    return _emit("conv2d", (x, filters), out if batched else out[0], vjp)


def rotate_pairs(x: Tensor, angles: Tensor) -> Tensor:
    """
    Rotate each coordinate pair (2i, 2i+1) of ``x`` by ``angles[..., i]``.

    Only the first d/2 angle coordinates are read; the rest receive zero gradient.
    """
    dim = x.shape[-1]
    if dim % 2:
        raise ConfigError(f"rotation needs an even dimension, got {dim}")
    if angles.shape != x.shape:
        raise DimensionError(f"rotation operands {x.shape} and {angles.shape} differ")
    half = dim // 2
    theta = angles.values[..., :half]
    cos, sin = np.cos(theta), np.sin(theta)
    real, imag = x.values[..., 0::2], x.values[..., 1::2]
    out = np.empty_like(x.values)
    out[..., 0::2] = cos * real - sin * imag
    out[..., 1::2] = sin * real + cos * imag

    def vjp(g):
        g_real, g_imag = g[..., 0::2], g[..., 1::2]
        grad_x = np.empty_like(x.values)
        grad_x[..., 0::2] = cos * g_real + sin * g_imag
        grad_x[..., 1::2] = -sin * g_real + cos * g_imag
        grad_angles = np.zeros_like(angles.values)
        grad_angles[..., :half] = g_real * (-sin * real - cos * imag) + g_imag * (cos * real - sin * imag)
        return grad_x, grad_angles

    return _emit("rotate_pairs", (x, angles), out, vjp)


def _correlate(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    dim = a.shape[-1]
    return np.fft.irfft(np.conj(np.fft.rfft(a, axis=-1)) * np.fft.rfft(b, axis=-1), n=dim, axis=-1)


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    dim = a.shape[-1]
    return np.fft.irfft(np.fft.rfft(a, axis=-1) * np.fft.rfft(b, axis=-1), n=dim, axis=-1)


def circular_correlation(a: Tensor, b: Tensor) -> Tensor:
    """out[k] = sum_i a[i] * b[(k + i) mod d] along the last axis."""
    if a.shape != b.shape:
        raise DimensionError(f"correlation operands {a.shape} and {b.shape} differ")
    dtype = a.dtype

    def vjp(g):
        return _correlate(g, b.values).astype(dtype), _convolve(g, a.values).astype(dtype)

    return _emit("circular_correlation", (a, b), _correlate(a.values, b.values).astype(dtype), vjp)
