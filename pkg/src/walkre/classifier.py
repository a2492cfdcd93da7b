"""Softmax over directional classes and reconciliation of the two orderings."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import L2R
from .numerics import Tensor, add, matmul, reshape, softmax

WEIGHT_RANGE = 0.08

Label = tuple[str, str] | None


@dataclass(frozen=True)
class Decision:
    """A directed positive relation: ``head`` is the first argument."""

    sentence_index: int
    head: str
    tail: str
    rtype: str

    def to_json(self) -> dict:
        return {"sentence_index": self.sentence_index, "head": self.head, "tail": self.tail, "type": self.rtype}

    @classmethod
    def from_json(cls, obj: dict) -> "Decision":
        return cls(int(obj["sentence_index"]), str(obj["head"]), str(obj["tail"]), str(obj["type"]))


@dataclass
class PairPrediction:
    head: str
    tail: str
    probs: np.ndarray
    label: Label

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.probs))

    @property
    def confidence(self) -> float:
        return float(np.max(self.probs))

    @property
    def positive(self) -> bool:
        return self.label is not None

    def triple(self) -> tuple[str, str, str] | None:
        """The directed fact this prediction asserts, if any."""
        if self.label is None:
            return None
        rtype, direction = self.label
        if direction == L2R:
            return (self.head, self.tail, rtype)
        return (self.tail, self.head, rtype)


def logits(v: Tensor, w_r: Tensor, b_r: Tensor) -> Tensor:
    """Class scores for a batch of (P, n_b) pair vectors."""
    return add(matmul(v, w_r), b_r)


def classify(
    v: Tensor,
    w_r: Tensor,
    b_r: Tensor,
    labels: Sequence[Label],
    head: str = "",
    tail: str = "",
) -> PairPrediction:
    n_b = w_r.shape[0]
    probs = softmax(logits(reshape(v, (1, n_b)), w_r, b_r)).data[0]
    return PairPrediction(head, tail, probs, labels[int(np.argmax(probs))])


def predictions_from_probs(
    probs: np.ndarray,
    heads: Iterable[str],
    tails: Iterable[str],
    labels: Sequence[Label],
) -> list[PairPrediction]:
    return [
        PairPrediction(h, t, row, labels[int(np.argmax(row))])
        for h, t, row in zip(heads, tails, probs)
    ]


def resolve_directions(p_ij: PairPrediction, p_ji: PairPrediction) -> tuple[str, str, str] | None:
    """Single (head, tail, rtype) decision for the unordered pair, or None.

    A positive prediction beats a negative one; two positives asserting
    different facts are settled by confidence, ties going to ``p_ij``.
    """
    if (p_ij.head, p_ij.tail) != (p_ji.tail, p_ji.head):
        raise ValueError(
            f"predictions cover ({p_ij.head}, {p_ij.tail}) and ({p_ji.head}, {p_ji.tail}), "
            "not the two orderings of one pair"
        )
    a, b = p_ij.triple(), p_ji.triple()
    if a is None or b is None:
        return a if b is None else b
    if a == b:
        return a
    return b if p_ji.confidence > p_ij.confidence else a


def sentence_decisions(sentence_index: int, predictions: dict[tuple[int, int], PairPrediction], n: int) -> list[Decision]:
    """Reconcile each unordered pair of a sentence, canonical order i < j."""
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            fact = resolve_directions(predictions[(i, j)], predictions[(j, i)])
            if fact is not None:
                out.append(Decision(sentence_index, *fact))
    return out


def write_decisions(decisions: Iterable[Decision], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in decisions:
            fh.write(json.dumps(d.to_json(), ensure_ascii=False) + "\n")


def read_decisions(path: str | Path) -> list[Decision]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(Decision.from_json(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed decision: {exc}") from None
    return out
