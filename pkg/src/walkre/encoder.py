"""Bidirectional LSTM over word vectors and mention averaging.

Gate layout in the packed 4H weight columns is (input, forget, output,
candidate). Sequences are processed as right-padded batches; the backward
direction reverses each sentence inside its own length, so padding never
leaks into real positions in either direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import EntityMention
from .numerics import (
    Tensor,
    add,
    concat,
    matmul,
    mul,
    reshape,
    sigmoid,
    slice_axis,
    stack,
    take,
    tanh,
)
from .params import ModelParams

WEIGHT_RANGE = 0.08


@dataclass
class LstmDirection:
    w_ih: Tensor  # n_in x 4H
    w_hh: Tensor  # H x 4H
    b: Tensor  # 4H

    @property
    def hidden(self) -> int:
        return self.w_hh.shape[0]


@dataclass
class LstmParams:
    forward: LstmDirection
    backward: LstmDirection

    @property
    def output_size(self) -> int:
        return 2 * self.forward.hidden

    @classmethod
    def from_params(cls, params: ModelParams) -> "LstmParams":
        return cls(
            LstmDirection(params["lstm.fw.w_ih"], params["lstm.fw.w_hh"], params["lstm.fw.b"]),
            LstmDirection(params["lstm.bw.w_ih"], params["lstm.bw.w_hh"], params["lstm.bw.b"]),
        )


def init_lstm(params: ModelParams, n_in: int, hidden: int, rng: np.random.Generator) -> LstmParams:
    dirs = []
    for tag in ("fw", "bw"):
        bias = np.zeros(4 * hidden)
        bias[hidden : 2 * hidden] = 1.0  # forget gate
        dirs.append(
            LstmDirection(
                params.add(f"lstm.{tag}.w_ih", rng.uniform(-WEIGHT_RANGE, WEIGHT_RANGE, (n_in, 4 * hidden)), bias=False),
                params.add(f"lstm.{tag}.w_hh", rng.uniform(-WEIGHT_RANGE, WEIGHT_RANGE, (hidden, 4 * hidden)), bias=False),
                params.add(f"lstm.{tag}.b", bias, bias=True),
            )
        )
    return LstmParams(*dirs)


def lstm_pass(x: Tensor, cell: LstmDirection) -> Tensor:
    """Left-to-right LSTM over a (B, T, n_in) batch from zero states."""
    batch, steps, _ = x.shape
    hsz = cell.hidden
    pre = add(matmul(x, cell.w_ih), cell.b)  # B x T x 4H
    h = Tensor(np.zeros((batch, hsz)))
    c = Tensor(np.zeros((batch, hsz)))
    outputs = []
    for t in range(steps):
        gates = add(reshape(slice_axis(pre, t, t + 1, axis=1), (batch, 4 * hsz)), matmul(h, cell.w_hh))
        i = sigmoid(slice_axis(gates, 0, hsz))
        f = sigmoid(slice_axis(gates, hsz, 2 * hsz))
        o = sigmoid(slice_axis(gates, 2 * hsz, 3 * hsz))
        g = tanh(slice_axis(gates, 3 * hsz, 4 * hsz))
        c = add(mul(f, c), mul(i, g))
        h = mul(o, tanh(c))
        outputs.append(h)
    return stack(outputs, axis=1)


def reversal_index(lengths: Sequence[int], steps: int) -> np.ndarray:
    """Flat row indices reversing each sequence within its own length."""
    idx = np.empty((len(lengths), steps), dtype=np.int64)
    for b, n in enumerate(lengths):
        order = np.arange(steps)
        order[:n] = order[:n][::-1]
        idx[b] = b * steps + order
    return idx


def blstm_encode_batch(x: Tensor, lengths: Sequence[int], lstm: LstmParams) -> Tensor:
    """Encode a right-padded (B, T, n_in) batch into (B, T, 2H)."""
    batch, steps, n_in = x.shape
    rev = reversal_index(lengths, steps)
    fw = lstm_pass(x, lstm.forward)
    x_rev = take(reshape(x, (batch * steps, n_in)), rev)
    bw_rev = lstm_pass(x_rev, lstm.backward)
    hsz = lstm.backward.hidden
    bw = take(reshape(bw_rev, (batch * steps, hsz)), rev)
    return concat([fw, bw], axis=-1)


def blstm_encode(words: Tensor, lstm: LstmParams) -> Tensor:
    """e_t = [forward h_t ; backward h_t] for a (T, n_in) sequence."""
    steps, n_in = words.shape
    if steps == 0:
        raise ValueError("cannot encode an empty sequence")
    out = blstm_encode_batch(reshape(words, (1, steps, n_in)), [steps], lstm)
    return reshape(out, (steps, lstm.output_size))


def averaging_matrix(entities: Sequence[EntityMention], steps: int) -> np.ndarray:
    avg = np.zeros((len(entities), steps))
    for k, ent in enumerate(entities):
        avg[k, ent.start : ent.end] = 1.0 / (ent.end - ent.start)
    return avg


def entity_average(entity: EntityMention, encoded: Tensor) -> Tensor:
    """Mean of the encoder rows inside the mention span."""
    avg = averaging_matrix([entity], encoded.shape[0])
    return reshape(matmul(Tensor(avg), encoded), (encoded.shape[1],))


def entity_averages(entities: Sequence[EntityMention], encoded: Tensor) -> Tensor:
    return matmul(Tensor(averaging_matrix(entities, encoded.shape[0])), encoded)
