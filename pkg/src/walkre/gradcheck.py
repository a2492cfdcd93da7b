"""Central finite-difference verification of model gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import TrainConfig
from .dataset import EntityMention, GoldRelation, Sentence, build_vocab
from .model import WalkModel
from .numerics import Tensor, backward, no_grad
from .params import ModelParams

DIMS = {
    "tiny": dict(n_w=8, n_e=8, n_t=4, n_p=4, n_s=8),
    "small": dict(n_w=16, n_e=16, n_t=6, n_p=6, n_s=12),
}


@dataclass
class GradCheckReport:
    worst: dict[str, float]
    checked: int

    @property
    def max_error(self) -> float:
        return max(self.worst.values()) if self.worst else 0.0

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_error < tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    """|a - n| / max(|a|, |n|, floor), elementwise."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / denom


def check_gradients(
    params: ModelParams,
    loss_fn: Callable[[], Tensor],
    h: float = 1e-5,
    names: list[str] | None = None,
) -> GradCheckReport:
    """Compare analytic gradients of ``loss_fn`` with central differences, per element."""
    params.zero_grad()
    backward(loss_fn())
    worst = {}
    checked = 0
    for name in names or params.names():
        t = params[name]
        analytic = t.grad.copy()
        numeric = np.zeros_like(t.data)
        flat, nflat = t.data.reshape(-1), numeric.reshape(-1)
        with no_grad():
            for k in range(flat.size):
                saved = flat[k]
                flat[k] = saved + h
                up = loss_fn().item()
                flat[k] = saved - h
                down = loss_fn().item()
                flat[k] = saved
                nflat[k] = (up - down) / (2 * h)
        worst[name] = float(relative_error(analytic, numeric).max()) if analytic.size else 0.0
        checked += flat.size
    return GradCheckReport(worst, checked)


def tiny_sentence() -> Sentence:
    """Three entities (one of them two tokens long) and two relations."""
    return Sentence(
        "Anna met her colleagues in the old town yesterday".split(),
        [
            EntityMention("T1", 0, 1, "PER"),
            EntityMention("T2", 3, 4, "PER"),
            EntityMention("T3", 6, 8, "LOC"),
        ],
        [GoldRelation("T1", "T2", "SOC"), GoldRelation("T2", "T3", "PHYS")],
    )


def tiny_model(seed: int = 3, dims: str = "tiny", walk_length: int = 4, l2: float = 1e-3) -> tuple[WalkModel, list]:
    sentence = tiny_sentence()
    vocab = build_vocab([sentence])
    cfg = TrainConfig(
        walk_length=walk_length,
        beta=0.6,
        input_dropout=0.0,
        output_dropout=0.0,
        l2=l2,
        seed=seed,
        **DIMS[dims],
    )
    model = WalkModel(cfg, vocab)
    # spread weights beyond the init range so every gate and sigmoid is exercised
    rng = np.random.default_rng(seed + 1000)
    for _, t in model.params.items():
        t.data[...] = rng.normal(0.0, 0.5, t.shape)
    return model, model.prepare([sentence])


def run_gradcheck(seed: int = 3, dims: str = "tiny", h: float = 1e-5) -> GradCheckReport:
    model, batch = tiny_model(seed, dims)
    return check_gradients(model.params, lambda: model.loss(batch), h=h)
