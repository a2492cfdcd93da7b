"""Mini-batch training with early stopping and parameter averaging.

After every epoch the running mean of all epoch-end snapshots is scored on
the development set; the averaged parameters from the best-scoring epoch
are what :func:`train` returns.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .config import TrainConfig
from .dataset import Sentence, Vocabulary, build_vocab
from .evaluation import gold_decisions, micro_prf
from .model import WalkModel
from .numerics import AdamState, DivergenceError, adam_step, backward, clip_gradients
from .params import ModelParams

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"WALKRE-CHECKPOINT 1\n"


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    precision: float
    recall: float
    f1: float
    improved: bool

    def line(self) -> str:
        mark = " *" if self.improved else ""
        return (
            f"epoch {self.epoch:3d}  loss {self.train_loss:.6f}  "
            f"dev P {self.precision:.4f} R {self.recall:.4f} F1 {self.f1:.4f}{mark}"
        )


@dataclass
class TrainResult:
    model: WalkModel
    log: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_f1: float = 0.0

    @property
    def losses(self) -> list[float]:
        return [r.train_loss for r in self.log]


@dataclass
class TrainState:
    adam: AdamState
    snapshot_sum: dict[str, np.ndarray]
    snapshots: int = 0
    best_f1: float = -1.0
    best_epoch: int = 0
    best_params: dict[str, np.ndarray] | None = None
    epochs_since_improvement: int = 0


def batches(n: int, size: int, rng: np.random.Generator) -> list[np.ndarray]:
    order = rng.permutation(n)
    return [order[k : k + size] for k in range(0, n, size)]


def evaluate_f1(model: WalkModel, prepared, gold) -> tuple[float, float, float]:
    return micro_prf(gold, set(model.decide(prepared)))


def train(
    train_corpus: Sequence[Sentence],
    dev_corpus: Sequence[Sentence],
    config: TrainConfig,
    vocab: Vocabulary | None = None,
    word_vectors: np.ndarray | None = None,
    model: WalkModel | None = None,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> TrainResult:
    if not train_corpus or not dev_corpus:
        raise ValueError("training and development corpora must be non-empty")
    if model is None:
        vocab = vocab or build_vocab(train_corpus)
        model = WalkModel(config, vocab, word_vectors=word_vectors)
    cfg = model.config
    params = model.params
    shuffle_rng = np.random.default_rng([cfg.seed, 0])
    dropout_rng = np.random.default_rng([cfg.seed, 1])

    train_prep = model.prepare(train_corpus)
    dev_prep = model.prepare(dev_corpus)
    dev_gold = gold_decisions(dev_corpus)

    trainable = [t for _, t in params.trainable()]
    state = TrainState(
        adam=AdamState(lr=cfg.lr),
        snapshot_sum={k: np.zeros_like(t.data) for k, t in params.items()},
    )
    state.adam.init_for(trainable)
    result = TrainResult(model)

    for epoch in range(1, cfg.max_epochs + 1):
        losses = []
        for idx in batches(len(train_prep), cfg.batch_size, shuffle_rng):
            batch = [train_prep[k] for k in idx]
            params.zero_grad()
            loss = model.loss(batch, training=True, rng=dropout_rng)
            value = loss.item()
            if not math.isfinite(value):
                raise DivergenceError(f"non-finite loss {value} at epoch {epoch}")
            losses.append(value)
            if not loss.requires_grad:
                continue
            backward(loss)
            grads = clip_gradients([t.grad for t in trainable], cfg.clip)
            adam_step(trainable, grads, state.adam)

        current = params.snapshot()
        for k, v in current.items():
            state.snapshot_sum[k] += v
        state.snapshots += 1
        averaged = {k: v / state.snapshots for k, v in state.snapshot_sum.items()}

        params.load(averaged)
        p, r, f1 = evaluate_f1(model, dev_prep, dev_gold)
        params.load(current)

        improved = f1 > state.best_f1
        if improved:
            state.best_f1, state.best_epoch = f1, epoch
            state.best_params = averaged
            state.epochs_since_improvement = 0
        else:
            state.epochs_since_improvement += 1
        record = EpochRecord(epoch, float(np.mean(losses)) if losses else 0.0, p, r, f1, improved)
        result.log.append(record)
        logger.info(record.line())
        if on_epoch is not None:
            on_epoch(record)
        if state.epochs_since_improvement >= cfg.patience:
            break

    params.load(state.best_params)
    result.best_epoch = state.best_epoch
    result.best_f1 = state.best_f1
    return result


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(model: WalkModel, path: str | Path) -> None:
    """Write config, vocabulary and raw float64 parameters to one file.

    Layout: a magic line, one JSON header line, then every tensor's
    little-endian float64 values in header order.
    """
    tensors = [
        {"name": k, "shape": list(t.shape), "bias": model.params.is_bias(k)} for k, t in model.params.items()
    ]
    header = {
        "config": model.config.to_dict(),
        "vocab": model.vocab.to_json(),
        "frozen": sorted(model.params.frozen),
        "tensors": tensors,
    }
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(json.dumps(header, ensure_ascii=False).encode("utf-8") + b"\n")
        for _, t in model.params.items():
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> WalkModel:
    with open(path, "rb") as fh:
        if fh.readline() != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a walkre checkpoint")
        header = json.loads(fh.readline().decode("utf-8"))
        params = ModelParams()
        for entry in header["tensors"]:
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise ValueError(f"{path}: truncated tensor {entry['name']}")
            values = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(entry["shape"])
            params.add(entry["name"], values, bias=bool(entry["bias"]))
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after the last tensor")
    params.frozen.update(header.get("frozen", []))
    config = TrainConfig.from_dict(header["config"])
    return WalkModel(config, Vocabulary.from_json(header["vocab"]), params=params)
