"""Gradient clipping and the Adam update."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import DivergenceError, Tensor


def global_norm(grads: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(np.sum([np.vdot(g, g) for g in grads])))


def clip_gradients(grads: Sequence, threshold: float) -> list[np.ndarray]:
    """Rescale ``grads`` so their joint L2 norm does not exceed ``threshold``.

    Accepts arrays or tensors (their ``.grad`` is used) and returns new arrays.
    """
    if not threshold > 0:
        raise ValueError(f"clip threshold must be positive, got {threshold}")
    arrays = [np.asarray(g.grad if isinstance(g, Tensor) else g, dtype=np.float64) for g in grads]
    for g in arrays:
        if not np.all(np.isfinite(g)):
            raise DivergenceError("non-finite gradient encountered before clipping")
    norm = global_norm(arrays)
    if norm <= threshold:
        return [g.copy() for g in arrays]
    scale = threshold / norm
    return [g * scale for g in arrays]


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def init_for(self, params: Sequence[Tensor]) -> None:
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.t = 0


def adam_step(params: Sequence[Tensor], grads: Sequence[np.ndarray], state: AdamState) -> None:
    """Apply one bias-corrected Adam update to ``params`` in place."""
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} parameters but {len(grads)} gradients")
    if not state.m:
        state.init_for(params)
    if len(state.m) != len(params):
        raise ValueError("Adam state tracks a different number of parameters")
    state.t += 1
    c1 = 1.0 - state.beta1**state.t
    c2 = 1.0 - state.beta2**state.t
    updates = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g.shape != p.data.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.data.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        with np.errstate(invalid="ignore", over="ignore"):
            step = state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        if not np.all(np.isfinite(step)):
            raise DivergenceError("non-finite Adam update")
        updates.append(step)
    for p, step in zip(params, updates):
        p.data -= step
