"""The five-layer walk-based relation model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import classifier
from .classifier import Decision, predictions_from_probs, sentence_decisions
from .config import TrainConfig
from .dataset import Sentence, Vocabulary, generate_pairs
from .edge import PairLayout, concat_dim, context_dim, edge_layer, pair_layout
from .embeddings import EmbeddingTables, init_tables, word_ids
from .encoder import LstmParams, blstm_encode_batch, init_lstm
from .numerics import (
    Tensor,
    add,
    dropout,
    nll_sum,
    no_grad,
    reshape,
    softmax,
    sum_squares,
    take,
)
from .params import ModelParams
from .walks import aggregate_to_length, gather_pairs, scatter_pairs

WEIGHT_RANGE = 0.08


@dataclass
class Prepared:
    """Parameter-independent indices for one sentence."""

    index: int
    sentence: Sentence
    word_ids: np.ndarray
    layout: PairLayout
    labels: np.ndarray

    @property
    def n_pairs(self) -> int:
        return self.layout.n_pairs


@dataclass(frozen=True)
class Dimensions:
    n_w: int
    n_e: int
    n_t: int
    n_p: int
    n_d: int
    n_m: int
    n_s: int
    n_b: int
    n_r: int


class WalkModel:
    def __init__(
        self,
        config: TrainConfig,
        vocab: Vocabulary,
        word_vectors: np.ndarray | None = None,
        params: ModelParams | None = None,
    ):
        self.config = config
        self.vocab = vocab
        if params is None:
            params = self._init_params(word_vectors)
        self.params = params
        if config.freeze_embeddings:
            params.frozen.add("emb.word")
        self.tables = EmbeddingTables.from_params(params)
        self.lstm = LstmParams.from_params(params)
        self.check_dimensions()

    def _init_params(self, word_vectors: np.ndarray | None) -> ModelParams:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        params = ModelParams()
        init_tables(params, self.vocab, cfg.n_w, cfg.n_t, cfg.n_p, rng, word_vectors)
        init_lstm(params, cfg.n_w, cfg.hidden_size, rng)
        n_e = 2 * cfg.hidden_size
        if cfg.use_context:
            params.add("att.q", rng.uniform(-WEIGHT_RANGE, WEIGHT_RANGE, context_dim(n_e, cfg.n_t, cfg.n_p)), bias=False)
        n_m = concat_dim(n_e, cfg.n_t, cfg.n_p, cfg.use_context)
        params.add("edge.w_s", rng.uniform(-WEIGHT_RANGE, WEIGHT_RANGE, (n_m, cfg.n_s)), bias=False)
        if cfg.walk_length > 1:
            params.add("walk.w_b", rng.uniform(-WEIGHT_RANGE, WEIGHT_RANGE, (cfg.n_b, cfg.n_b)), bias=False)
        params.add("cls.w_r", rng.uniform(-WEIGHT_RANGE, WEIGHT_RANGE, (cfg.n_b, self.vocab.n_labels)), bias=False)
        params.add("cls.b_r", np.zeros(self.vocab.n_labels), bias=True)
        return params

    @property
    def dims(self) -> Dimensions:
        cfg = self.config
        n_e = self.lstm.output_size
        return Dimensions(
            n_w=self.tables.n_w,
            n_e=n_e,
            n_t=self.tables.n_t,
            n_p=self.tables.n_p,
            n_d=context_dim(n_e, self.tables.n_t, self.tables.n_p),
            n_m=self.params["edge.w_s"].shape[0],
            n_s=self.params["edge.w_s"].shape[1],
            n_b=self.params["cls.w_r"].shape[0],
            n_r=self.params["cls.w_r"].shape[1],
        )

    def check_dimensions(self) -> None:
        """Assert the structural relations between layer widths."""
        d = self.dims
        cfg = self.config
        assert d.n_e == cfg.n_e or cfg.lstm_hidden, f"encoder width {d.n_e} != n_e {cfg.n_e}"
        assert d.n_m == concat_dim(d.n_e, d.n_t, d.n_p, cfg.use_context), "W_s input width"
        assert d.n_s < d.n_m, f"n_s={d.n_s} must be below n_m={d.n_m}"
        assert d.n_b == d.n_s, "walk layer must consume edge vectors directly"
        assert d.n_r == 2 * len(self.vocab.relation_types) + 1, "class count must be 2r + 1"
        if cfg.use_context:
            assert self.params["att.q"].shape == (d.n_d,), "attention vector width"
        if cfg.walk_length > 1:
            assert self.params["walk.w_b"].shape == (d.n_b, d.n_b), "W_b shape"

    # ------------------------------------------------------------------

    def prepare(self, sentences: Sequence[Sentence]) -> list[Prepared]:
        out = []
        for k, s in enumerate(sentences):
            pairs = generate_pairs(s, self.vocab)
            layout = pair_layout(
                s,
                self.vocab,
                [(p.head, p.tail) for p in pairs],
                exclude_all_mentions=self.config.exclude_all_mentions,
            )
            out.append(Prepared(k, s, word_ids(s, self.vocab), layout, np.array([p.label for p in pairs], dtype=np.int64)))
        return out

    def encode(self, batch: Sequence[Prepared], training: bool, rng: np.random.Generator | None) -> list[Tensor]:
        """Pair representations v(l) for each sentence of the batch (P_b x n_b each)."""
        cfg = self.config
        lengths = [len(p.word_ids) for p in batch]
        steps = max(lengths)
        ids = np.zeros((len(batch), steps), dtype=np.int64)
        for b, p in enumerate(batch):
            ids[b, : lengths[b]] = p.word_ids
        x = take(self.tables.word, ids)
        x = dropout(x, cfg.input_dropout, rng, training)
        encoded = blstm_encode_batch(x, lengths, self.lstm)
        n_e = encoded.shape[2]
        flat = reshape(encoded, (len(batch) * steps, n_e))

        q = self.params["att.q"] if cfg.use_context else None
        outputs = []
        for b, p in enumerate(batch):
            if p.n_pairs == 0:
                outputs.append(None)
                continue
            enc = take(flat, b * steps + np.arange(lengths[b]))
            edges = edge_layer(p.layout, enc, self.tables, self.params["edge.w_s"], q).edges
            if cfg.walk_length > 1:
                n = p.layout.n_entities
                graph = scatter_pairs(edges, p.layout.heads, p.layout.tails, n)
                graph = aggregate_to_length(graph, cfg.walk_length, self.params["walk.w_b"], cfg.beta)
                edges = gather_pairs(graph, p.layout.heads, p.layout.tails)
            outputs.append(dropout(edges, cfg.output_dropout, rng, training))
        return outputs

    def logits(self, batch: Sequence[Prepared], training: bool = False, rng=None) -> list[Tensor | None]:
        w_r, b_r = self.params["cls.w_r"], self.params["cls.b_r"]
        return [None if v is None else classifier.logits(v, w_r, b_r) for v in self.encode(batch, training, rng)]

    def data_loss(self, batch: Sequence[Prepared], training: bool = False, rng=None) -> Tensor:
        """Mean negative log-likelihood over every pair instance of the batch."""
        total = None
        count = 0
        for p, z in zip(batch, self.logits(batch, training, rng)):
            if z is None:
                continue
            term = nll_sum(z, p.labels)
            total = term if total is None else add(total, term)
            count += p.n_pairs
        if total is None:
            return Tensor(0.0)
        return total * (1.0 / count)

    def l2_penalty(self, coefficient: float | None = None) -> Tensor:
        coefficient = self.config.l2 if coefficient is None else coefficient
        return l2_penalty(self.params, coefficient)

    def loss(self, batch: Sequence[Prepared], training: bool = False, rng=None) -> Tensor:
        return add(self.data_loss(batch, training, rng), self.l2_penalty())

    # ------------------------------------------------------------------

    def predict_probs(self, prepared: Sequence[Prepared], batch_size: int = 32) -> list[np.ndarray | None]:
        out: list[np.ndarray | None] = []
        with no_grad():
            for start in range(0, len(prepared), batch_size):
                chunk = prepared[start : start + batch_size]
                for z in self.logits(chunk):
                    out.append(None if z is None else softmax(z).data)
        return out

    def decide(self, prepared: Sequence[Prepared], batch_size: int = 32) -> list[Decision]:
        decisions = []
        labels = self.vocab.labels
        for p, probs in zip(prepared, self.predict_probs(prepared, batch_size)):
            if probs is None:
                continue
            ents = p.sentence.entities
            preds = predictions_from_probs(
                probs,
                (ents[h].id for h in p.layout.heads),
                (ents[t].id for t in p.layout.tails),
                labels,
            )
            by_pair = {(int(h), int(t)): pr for h, t, pr in zip(p.layout.heads, p.layout.tails, preds)}
            decisions.extend(sentence_decisions(p.index, by_pair, len(ents)))
        return decisions

    def predict(self, sentences: Sequence[Sentence], batch_size: int = 32) -> list[Decision]:
        return self.decide(self.prepare(sentences), batch_size)


def l2_penalty(params: ModelParams, coefficient: float) -> Tensor:
    """``coefficient`` times the summed squares of every non-bias parameter."""
    total = Tensor(0.0)
    if coefficient == 0.0:
        return total
    for w in params.weights():
        total = add(total, sum_squares(w))
    return total * coefficient
