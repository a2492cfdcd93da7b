"""One-length-walk (edge) representations for every ordered entity pair.

For pair (i, j) the edge vector is ``W_s`` applied to ``[v_i ; v_j ; c_ij]``
where ``v_i = [e_i ; t_i ; p_ij]`` and ``c_ij`` is an attention-weighted
average of the pair's context columns ``[e_z ; t_z ; p_zi ; p_zj]``.

The per-pair functions here mirror the definitions one pair at a time;
:func:`edge_layer` computes all pairs of a sentence at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Sentence, Vocabulary, position_index, relative_position
from .embeddings import EmbeddingTables, token_type_ids
from .encoder import averaging_matrix, entity_average
from .numerics import (
    Tensor,
    broadcast_to,
    concat,
    masked_softmax,
    matmul,
    mul,
    reshape,
    softmax,
    sum,
    take,
    tanh,
    transpose,
)

WEIGHT_RANGE = 0.08


def entity_dim(n_e: int, n_t: int, n_p: int) -> int:
    return n_e + n_t + n_p


def context_dim(n_e: int, n_t: int, n_p: int) -> int:
    """n_d: width of one context column."""
    return n_e + n_t + 2 * n_p


def concat_dim(n_e: int, n_t: int, n_p: int, use_context: bool = True) -> int:
    """n_m: width of [v_i ; v_j ; c_ij] (3 n_e + 3 n_t + 4 n_p with context)."""
    width = 2 * entity_dim(n_e, n_t, n_p)
    return width + context_dim(n_e, n_t, n_p) if use_context else width


def context_tokens(sentence: Sentence, i: int, j: int, exclude_all_mentions: bool = False) -> list[int]:
    """Token indices outside the target mentions (or outside every mention)."""
    blocked = set()
    mentions = sentence.entities if exclude_all_mentions else (sentence.entities[i], sentence.entities[j])
    for ent in mentions:
        blocked.update(ent.tokens)
    return [z for z in range(len(sentence.tokens)) if z not in blocked]


# ---------------------------------------------------------------------------
# single-pair definitions


def pair_entity_representations(
    sentence: Sentence,
    i: int,
    j: int,
    encoded: Tensor,
    tables: EmbeddingTables,
    vocab: Vocabulary,
) -> tuple[Tensor, Tensor]:
    ei, ej = sentence.entities[i], sentence.entities[j]
    p_ij = position_index(relative_position(ei.anchor, ej.anchor))
    p_ji = position_index(relative_position(ej.anchor, ei.anchor))
    v_i = concat([
        entity_average(ei, encoded),
        take(tables.etype, vocab.type_id(ei.etype)),
        take(tables.position, p_ij),
    ])
    v_j = concat([
        entity_average(ej, encoded),
        take(tables.etype, vocab.type_id(ej.etype)),
        take(tables.position, p_ji),
    ])
    return v_i, v_j


def context_matrix(
    sentence: Sentence,
    i: int,
    j: int,
    encoded: Tensor,
    tables: EmbeddingTables,
    vocab: Vocabulary,
    exclude_all_mentions: bool = False,
) -> tuple[Tensor, list[int]]:
    """(n_d, m) matrix whose columns are the pair's context words, plus their indices."""
    tokens = context_tokens(sentence, i, j, exclude_all_mentions)
    n_d = context_dim(encoded.shape[1], tables.n_t, tables.n_p)
    if not tokens:
        return Tensor(np.zeros((n_d, 0))), tokens
    ai, aj = sentence.entities[i].anchor, sentence.entities[j].anchor
    types = token_type_ids(sentence, vocab)
    z = np.array(tokens)
    rows = concat([
        take(encoded, z),
        take(tables.etype, types[z]),
        take(tables.position, [position_index(relative_position(t, ai)) for t in tokens]),
        take(tables.position, [position_index(relative_position(t, aj)) for t in tokens]),
    ])
    return transpose(rows), tokens


def attend(context: Tensor, q: Tensor) -> tuple[Tensor, Tensor]:
    """Attention weights over the columns of ``context`` and their weighted average."""
    n_d, m = context.shape
    if m == 0:
        return Tensor(np.zeros(0)), Tensor(np.zeros(n_d))
    scores = reshape(matmul(transpose(tanh(context)), reshape(q, (n_d, 1))), (m,))
    alpha = softmax(scores)
    pooled = reshape(matmul(context, reshape(alpha, (m, 1))), (n_d,))
    return alpha, pooled


def edge_representation(v_i: Tensor, v_j: Tensor, c_ij: Tensor | None, w_s: Tensor) -> Tensor:
    parts = [v_i, v_j] if c_ij is None else [v_i, v_j, c_ij]
    x = concat(parts)
    return reshape(matmul(reshape(x, (1, x.shape[0])), w_s), (w_s.shape[1],))


# ---------------------------------------------------------------------------
# whole-sentence computation


@dataclass
class PairLayout:
    """Index arrays describing every ordered pair of one sentence.

    Depends only on the sentence, so it is computed once and reused.
    """

    n_entities: int
    n_tokens: int
    heads: np.ndarray
    tails: np.ndarray
    entity_types: np.ndarray
    token_types: np.ndarray
    averaging: np.ndarray
    pos_ij: np.ndarray
    pos_ji: np.ndarray
    pos_zi: np.ndarray
    pos_zj: np.ndarray
    context_mask: np.ndarray

    @property
    def n_pairs(self) -> int:
        return self.heads.size


def pair_layout(
    sentence: Sentence,
    vocab: Vocabulary,
    pairs: Sequence[tuple[int, int]] | None = None,
    exclude_all_mentions: bool = False,
) -> PairLayout:
    ents = sentence.entities
    n, steps = len(ents), len(sentence.tokens)
    if pairs is None:
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    heads = np.array([p[0] for p in pairs], dtype=np.int64)
    tails = np.array([p[1] for p in pairs], dtype=np.int64)
    anchors = np.array([e.anchor for e in ents], dtype=np.int64)
    to_bucket = np.vectorize(position_index, otypes=[np.int64])

    covered = np.zeros((n, steps), dtype=bool)
    for k, ent in enumerate(ents):
        covered[k, ent.start : ent.end] = True
    if exclude_all_mentions:
        mask = np.broadcast_to(~covered.any(axis=0), (heads.size, steps)).copy()
    else:
        mask = ~(covered[heads] | covered[tails])

    z = np.arange(steps)
    return PairLayout(
        n_entities=n,
        n_tokens=steps,
        heads=heads,
        tails=tails,
        entity_types=np.array([vocab.type_id(e.etype) for e in ents], dtype=np.int64),
        token_types=token_type_ids(sentence, vocab),
        averaging=averaging_matrix(ents, steps),
        pos_ij=to_bucket(anchors[heads] - anchors[tails]) if heads.size else heads,
        pos_ji=to_bucket(anchors[tails] - anchors[heads]) if heads.size else heads,
        pos_zi=to_bucket(z[None, :] - anchors[heads][:, None]) if heads.size else np.zeros((0, steps), np.int64),
        pos_zj=to_bucket(z[None, :] - anchors[tails][:, None]) if heads.size else np.zeros((0, steps), np.int64),
        context_mask=mask,
    )


@dataclass
class EdgeOutput:
    edges: Tensor  # P x n_s
    attention: Tensor | None  # P x T, zero outside each pair's context


def edge_layer(
    layout: PairLayout,
    encoded: Tensor,
    tables: EmbeddingTables,
    w_s: Tensor,
    q: Tensor | None,
) -> EdgeOutput:
    """Edge vectors for every pair in ``layout``; ``q=None`` drops the context term."""
    ent = matmul(Tensor(layout.averaging), encoded)
    ent = concat([ent, take(tables.etype, layout.entity_types)])
    v_i = concat([take(ent, layout.heads), take(tables.position, layout.pos_ij)])
    v_j = concat([take(ent, layout.tails), take(tables.position, layout.pos_ji)])
    if q is None:
        return EdgeOutput(matmul(concat([v_i, v_j]), w_s), None)

    n_pairs, steps = layout.n_pairs, layout.n_tokens
    tok = concat([encoded, take(tables.etype, layout.token_types)])
    tok = broadcast_to(reshape(tok, (1, steps, tok.shape[1])), (n_pairs, steps, tok.shape[1]))
    ctx = concat([tok, take(tables.position, layout.pos_zi), take(tables.position, layout.pos_zj)])
    n_d = ctx.shape[2]
    scores = reshape(matmul(tanh(ctx), reshape(q, (n_d, 1))), (n_pairs, steps))
    alpha = masked_softmax(scores, layout.context_mask)
    pooled = sum(mul(reshape(alpha, (n_pairs, steps, 1)), ctx), axis=1)
    return EdgeOutput(matmul(concat([v_i, v_j, pooled]), w_s), alpha)
