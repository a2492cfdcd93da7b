"""Micro-averaged scoring, entity-count breakdowns and significance testing.

Decisions compare on (sentence index, head, tail, type), so a relation
predicted with its arguments reversed counts as wrong.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .classifier import Decision
from .dataset import Sentence

DEFAULT_BUCKETS: tuple[tuple[int, int], ...] = ((2, 3), (3, 4), (4, 6), (6, 12), (12, 23))


def gold_decisions(corpus: Sequence[Sentence]) -> set[Decision]:
    return {
        Decision(k, r.arg1, r.arg2, r.rtype)
        for k, s in enumerate(corpus)
        for r in s.relations
    }


@dataclass(frozen=True)
class Counts:
    tp: int
    fp: int
    fn: int

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def prf(self) -> tuple[float, float, float]:
        return prf_from_counts(self.tp, self.tp + self.fp, self.tp + self.fn)


def prf_from_counts(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def counts(gold: Iterable[Decision], pred: Iterable[Decision]) -> Counts:
    gold, pred = set(gold), set(pred)
    tp = len(gold & pred)
    return Counts(tp, len(pred) - tp, len(gold) - tp)


def micro_prf(gold: Iterable[Decision], pred: Iterable[Decision]) -> tuple[float, float, float]:
    return counts(gold, pred).prf()


def bucket_label(bucket: tuple[int, int]) -> str:
    lo, hi = bucket
    return str(lo) if hi == lo + 1 else f"[{lo}, {hi})"


def _check_buckets(buckets: Sequence[tuple[int, int]]) -> None:
    spans = sorted(buckets)
    for lo, hi in spans:
        if hi <= lo:
            raise ValueError(f"empty bucket [{lo}, {hi})")
    for (lo1, hi1), (lo2, _) in zip(spans, spans[1:]):
        if lo2 < hi1:
            raise ValueError(f"buckets [{lo1}, {hi1}) and [{lo2}, ...) overlap")


def breakdown_by_entity_count(
    gold: Iterable[Decision],
    pred: Iterable[Decision],
    sentences: Sequence[Sentence],
    buckets: Sequence[tuple[int, int]] = DEFAULT_BUCKETS,
) -> dict[tuple[int, int], Counts]:
    """Per-bucket counts for sentences whose entity count lies in [lo, hi).

    Buckets holding no sentence are left out of the result.
    """
    _check_buckets(buckets)
    gold, pred = set(gold), set(pred)
    out = {}
    for lo, hi in buckets:
        members = {k for k, s in enumerate(sentences) if lo <= len(s.entities) < hi}
        if not members:
            continue
        out[(lo, hi)] = counts(
            (d for d in gold if d.sentence_index in members),
            (d for d in pred if d.sentence_index in members),
        )
    return out


# ---------------------------------------------------------------------------
# approximate randomization


def _per_sentence(decisions: set[Decision], gold: set[Decision], index: dict[int, int]) -> tuple[np.ndarray, np.ndarray]:
    tp = np.zeros(len(index), dtype=np.int64)
    npred = np.zeros(len(index), dtype=np.int64)
    for d in decisions:
        k = index[d.sentence_index]
        npred[k] += 1
        tp[k] += d in gold
    return tp, npred


def _f1(tp: np.ndarray, npred: np.ndarray, n_gold: int) -> np.ndarray:
    denom = npred + n_gold
    return np.divide(2.0 * tp, denom, out=np.zeros(tp.shape, dtype=np.float64), where=denom > 0)


def randomization_statistics(
    pred_a: Iterable[Decision],
    pred_b: Iterable[Decision],
    gold: Iterable[Decision],
    swaps: np.ndarray,
) -> tuple[float, np.ndarray, list[int]]:
    """Observed |F1(A) - F1(B)| and the statistic under each row of ``swaps``.

    ``swaps`` is a boolean (iterations, sentences) array over the sorted
    sentence indices returned third; true exchanges that sentence's outputs.
    """
    pred_a, pred_b, gold = set(pred_a), set(pred_b), set(gold)
    sents = sorted({d.sentence_index for d in pred_a | pred_b | gold})
    index = {s: k for k, s in enumerate(sents)}
    tp_a, np_a = _per_sentence(pred_a, gold, index)
    tp_b, np_b = _per_sentence(pred_b, gold, index)
    n_gold = len(gold)
    observed = abs(
        _f1(np.array(tp_a.sum()), np.array(np_a.sum()), n_gold)
        - _f1(np.array(tp_b.sum()), np.array(np_b.sum()), n_gold)
    )
    swaps = np.asarray(swaps, dtype=bool).reshape(-1, len(sents))
    keep = ~swaps
    f_a = _f1(keep @ tp_a + swaps @ tp_b, keep @ np_a + swaps @ np_b, n_gold)
    f_b = _f1(keep @ tp_b + swaps @ tp_a, keep @ np_b + swaps @ np_a, n_gold)
    return float(observed), np.abs(f_a - f_b), sents


def approx_randomization(
    pred_a: Iterable[Decision],
    pred_b: Iterable[Decision],
    gold: Iterable[Decision],
    iterations: int = 10000,
    seed: int = 0,
    chunk: int = 4096,
) -> float:
    """p-value of the F1 difference between two systems, (hits + 1) / (iterations + 1)."""
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    pred_a, pred_b, gold = set(pred_a), set(pred_b), set(gold)
    n_sent = len({d.sentence_index for d in pred_a | pred_b | gold})
    rng = np.random.default_rng(seed)
    hits = 0
    observed = None
    done = 0
    while done < iterations:
        size = min(chunk, iterations - done)
        swaps = rng.random((size, n_sent)) < 0.5
        observed, stats, _ = randomization_statistics(pred_a, pred_b, gold, swaps)
        hits += int(np.count_nonzero(stats >= observed))
        done += size
    return (hits + 1) / (iterations + 1)


# ---------------------------------------------------------------------------
# reports


def report_dict(
    prf: tuple[float, float, float],
    breakdown: dict[tuple[int, int], Counts] | None = None,
    p_value: float | None = None,
) -> dict:
    out: dict = {"precision": prf[0], "recall": prf[1], "f1": prf[2]}
    if breakdown is not None:
        out["by_entity_count"] = [
            {"bucket": bucket_label(b), "lo": b[0], "hi": b[1], "tp": c.tp, "fp": c.fp, "fn": c.fn, "f1": c.prf()[2]}
            for b, c in breakdown.items()
        ]
    if p_value is not None:
        out["approx_randomization_p"] = p_value
    return out


def format_report(report: dict) -> str:
    lines = [f"P={report['precision']:.3f} R={report['recall']:.3f} F1={report['f1']:.3f}"]
    rows = report.get("by_entity_count")
    if rows:
        lines.append("")
        lines.append(f"{'# entities':<12}{'TP':>6}{'FP':>6}{'FN':>6}{'F1':>8}")
        for row in rows:
            lines.append(f"{row['bucket']:<12}{row['tp']:>6}{row['fp']:>6}{row['fn']:>6}{row['f1']:>8.3f}")
    if "approx_randomization_p" in report:
        lines.append("")
        lines.append(f"approximate randomization p = {report['approx_randomization_p']:.4f}")
    return "\n".join(lines)


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2)
