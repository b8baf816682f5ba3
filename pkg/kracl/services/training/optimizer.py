"""Adaptive-moment optimizer with decoupled weight decay."""
import logging
import math
from typing import Dict, Iterable, Literal, Optional, Tuple

import numpy as np

from ...core.errors import CheckpointError, ConfigError
from ...engine import Tensor

logger = logging.getLogger(__name__)

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


class AdamW:
    """
    Adam whose weight decay shrinks parameters directly instead of entering the gradient:

        p ← p · (1 − lr·λ)
        m ← β₁m + (1 − β₁)g,  v ← β₂v + (1 − β₂)g²
        p ← p − lr · m̂ / (√v̂ + ε)

    Moments are keyed by parameter name so they can be stored in a checkpoint.
    """

    def __init__(
        self,
        parameters: Iterable[Tuple[str, Tensor]],
        lr: float,
        weight_decay: float = 0.01,
        beta1: float = BETA1,
        beta2: float = BETA2,
        eps: float = EPSILON,
        grad_clip_norm: Optional[float] = None,
        schedule: Literal["constant", "cosine"] = "constant",
        total_steps: int = 0,
    ):
        if lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {lr}")
        if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
            raise ConfigError(f"betas must lie in [0, 1), got ({beta1}, {beta2})")
        if weight_decay < 0:
            raise ConfigError(f"weight decay must be non-negative, got {weight_decay}")
        self.parameters: Dict[str, Tensor] = dict(parameters)
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.grad_clip_norm = grad_clip_norm
        self.schedule = schedule
        self.total_steps = total_steps
        self.step_count = 0
        self.m = {name: np.zeros_like(p.values) for name, p in self.parameters.items()}
        self.v = {name: np.zeros_like(p.values) for name, p in self.parameters.items()}

    def current_lr(self) -> float:
        if self.schedule == "cosine" and self.total_steps > 0:
            progress = min(self.step_count, self.total_steps) / self.total_steps
            return self.lr * 0.5 * (1.0 + math.cos(math.pi * progress))
        return self.lr

    def _clip(self, gradients: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        if self.grad_clip_norm is None:
            return gradients
        norm = math.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in gradients.values()))
        if norm <= self.grad_clip_norm:
            return gradients
        scale = self.grad_clip_norm / (norm + 1e-12)
        return {name: g * scale for name, g in gradients.items()}

    def step(self, gradients: Dict[str, np.ndarray]) -> float:
        """Apply one update in place; parameters without a gradient entry keep their values. Returns the lr used."""
        gradients = self._clip(gradients)
        lr = self.current_lr()
        self.step_count += 1
        t = self.step_count
        bias1 = 1.0 - self.beta1 ** t
        bias2 = 1.0 - self.beta2 ** t
        for name, param in self.parameters.items():
            grad = gradients.get(name)
            if grad is None:
                continue
            values = param.values
            if self.weight_decay:
                values *= 1.0 - lr * self.weight_decay
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(grad)
            m_hat = m / bias1
            v_hat = v / bias2
            values -= (lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(values.dtype)
        return lr

    def state(self) -> Dict[str, np.ndarray]:
        moments = {f"adam_m/{name}": m.copy() for name, m in self.m.items()}
        moments.update({f"adam_v/{name}": v.copy() for name, v in self.v.items()})
        return moments

    def load_state(self, moments: Dict[str, np.ndarray], step_count: int) -> None:
        for name, param in self.parameters.items():
            for prefix, target in (("adam_m", self.m), ("adam_v", self.v)):
                key = f"{prefix}/{name}"
                if key not in moments:
                    raise CheckpointError(f"optimizer block {key} is missing")
                if moments[key].shape != param.shape:
                    raise CheckpointError(f"{key} has shape {moments[key].shape}, expected {param.shape}")
                target[name] = moments[key].astype(param.dtype, copy=True)
        self.step_count = step_count
