"""Knowledge projection heads and 1-N dot-product scoring."""
from typing import Optional

import numpy as np

from ...core.errors import ConfigError, DimensionError
from ...engine import Tensor, ops
from ...engine.init import full, glorot_uniform
from ...models.scoring import HeadKind, HeadParams

# PReLU slopes start where a default PReLU layer does
PRELU_INIT = 0.25


def _convolve(head: HeadParams, h_s: Tensor, h_r: Tensor, train_mode: bool, rng) -> Tensor:
    rows = h_s.shape[0]
    grid = (rows, 1, head.reshape_width, head.reshape_height)
    image = ops.concat([ops.reshape(h_s, grid), ops.reshape(h_r, grid)], axis=2)
    features = ops.prelu(ops.conv2d(image, head.filters), head.conv_slope)
    flat = ops.reshape(features, (rows, int(np.prod(features.shape[1:]))))
    flat = ops.dropout(flat, head.dropout, rng, train_mode)
    return ops.prelu(ops.matmul(flat, head.projection), head.out_slope)


def project(
    head: HeadParams,
    h_s: Tensor,
    h_r: Tensor,
    train_mode: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """Predicted object vector z for each (subject, relation) row."""
    if h_s.shape != h_r.shape or h_s.shape[-1] != head.dim:
        raise DimensionError(f"head of dimension {head.dim} cannot project {h_s.shape} with {h_r.shape}")
    head.validate_dimensions()
    single = h_s.ndim == 1
    if single:
        h_s = ops.reshape(h_s, (1, head.dim))
        h_r = ops.reshape(h_r, (1, head.dim))

    if head.kind is HeadKind.TRANSE:
        z = ops.add(h_s, h_r)
    elif head.kind is HeadKind.DISTMULT:
        z = ops.mul(h_s, h_r)
    elif head.kind is HeadKind.ROTATE:
        z = ops.rotate_pairs(h_s, h_r)
    elif head.kind is HeadKind.CONVE:
        z = _convolve(head, h_s, h_r, train_mode, rng)
    else:
        raise ConfigError(f"unknown projection head {head.kind!r}")
    return ops.reshape(z, (head.dim,)) if single else z


def score_all(z: Tensor, entities: Tensor) -> Tensor:
    """Raw dot product of each prediction with every entity row; no normalization."""
    if z.shape[-1] != entities.shape[1]:
        raise DimensionError(f"prediction {z.shape} and entity table {entities.shape} differ in width")
    if z.ndim == 1:
        scores = ops.matmul(ops.reshape(z, (1, z.shape[0])), entities.T)
        return ops.reshape(scores, (entities.shape[0],))
    return ops.matmul(z, entities.T)


def init_head(
    kind: HeadKind,
    dim: int,
    rng: np.random.Generator,
    dtype=np.float32,
    filters: int = 32,
    kernel: int = 3,
    reshape_width: int = 10,
    dropout: float = 0.2,
) -> HeadParams:
    if kind is not HeadKind.CONVE:
        head = HeadParams(kind=kind, dim=dim, dropout=dropout)
        head.validate_dimensions()
        return head
    if dim % reshape_width:
        raise ConfigError(f"reshape width {reshape_width} does not divide dimension {dim}")
    reshape_height = dim // reshape_width
    out_h, out_w = 2 * reshape_width - kernel + 1, reshape_height - kernel + 1
    if out_h <= 0 or out_w <= 0:
        raise ConfigError(f"kernel {kernel} does not fit a {2 * reshape_width}×{reshape_height} image")
    head = HeadParams(
        kind=kind,
        dim=dim,
        filters=glorot_uniform((filters, 1, kernel, kernel), rng, dtype),
        projection=glorot_uniform((filters * out_h * out_w, dim), rng, dtype),
        conv_slope=full((1,), PRELU_INIT, dtype),
        out_slope=full((1,), PRELU_INIT, dtype),
        reshape_width=reshape_width,
        reshape_height=reshape_height,
        dropout=dropout,
    )
    head.validate_dimensions()
    return head
