"""Word, entity-type and relative-position lookup tables."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Sentence, Vocabulary, position_index
from .numerics import Tensor, take
from .params import ModelParams

logger = logging.getLogger(__name__)

INIT_RANGE = 0.05


@dataclass
class EmbeddingTables:
    word: Tensor
    etype: Tensor
    position: Tensor

    @property
    def n_w(self) -> int:
        return self.word.shape[1]

    @property
    def n_t(self) -> int:
        return self.etype.shape[1]

    @property
    def n_p(self) -> int:
        return self.position.shape[1]

    @classmethod
    def from_params(cls, params: ModelParams) -> "EmbeddingTables":
        return cls(params["emb.word"], params["emb.type"], params["emb.position"])


def init_tables(
    params: ModelParams,
    vocab: Vocabulary,
    n_w: int,
    n_t: int,
    n_p: int,
    rng: np.random.Generator,
    word_vectors: np.ndarray | None = None,
) -> EmbeddingTables:
    word = word_vectors if word_vectors is not None else rng.uniform(-INIT_RANGE, INIT_RANGE, (len(vocab.words), n_w))
    if word.shape != (len(vocab.words), n_w):
        raise ValueError(f"word table shape {word.shape} != {(len(vocab.words), n_w)}")
    # the null type (row 0) is already part of vocab.entity_types
    etype = rng.uniform(-INIT_RANGE, INIT_RANGE, (len(vocab.entity_types), n_t))
    position = rng.uniform(-INIT_RANGE, INIT_RANGE, (vocab.position_buckets, n_p))
    return EmbeddingTables(
        params.add("emb.word", word, bias=False),
        params.add("emb.type", etype, bias=False),
        params.add("emb.position", position, bias=False),
    )


def read_vectors(path: str | Path) -> dict[str, np.ndarray]:
    """Read ``word v1 ... vN`` lines; every line must carry the same N."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if not parts or not parts[0]:
                continue
            values = np.array([float(x) for x in parts[1:] if x], dtype=np.float64)
            if dim is None:
                dim = values.size
            elif values.size != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} values, found {values.size}")
            vectors[parts[0]] = values
    return vectors


def load_pretrained(
    path: str | Path,
    vocab: Vocabulary,
    n_w: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """Word table seeded from a vector file, plus the fraction of vocabulary found.

    Vocabulary words absent from the file (and the reserved rows) are drawn
    uniformly from [-0.05, 0.05].
    """
    vectors = read_vectors(path)
    table = rng.uniform(-INIT_RANGE, INIT_RANGE, (len(vocab.words), n_w))
    found = 0
    for word, k in vocab.word_index.items():
        vec = vectors.get(word)
        if vec is None:
            continue
        if vec.size != n_w:
            raise ValueError(f"{path}: vectors have {vec.size} dimensions, expected {n_w}")
        table[k] = vec
        found += 1
    coverage = found / len(vocab.words)
    logger.info("pretrained vectors cover %d of %d vocabulary words", found, len(vocab.words))
    return table, coverage


def word_ids(sentence: Sentence, vocab: Vocabulary) -> np.ndarray:
    return np.array([vocab.word_id(t) for t in sentence.tokens], dtype=np.int64)


def embed_sentence(sentence: Sentence, vocab: Vocabulary, tables: EmbeddingTables) -> Tensor:
    """One n_w row per token; out-of-vocabulary tokens get the UNK row."""
    return take(tables.word, word_ids(sentence, vocab))


def embed_position(offset, tables: EmbeddingTables) -> Tensor:
    """Position-table lookup for a signed offset (or an array of offsets)."""
    if np.ndim(offset) == 0:
        return take(tables.position, position_index(int(offset)))
    idx = np.vectorize(position_index, otypes=[np.int64])(np.asarray(offset))
    return take(tables.position, idx)


def token_type_ids(
    sentence: Sentence,
    vocab: Vocabulary,
    exclude: tuple[int, ...] = (),
) -> np.ndarray:
    """Type row for each token: the first covering mention's type, else null.

    Mentions listed in ``exclude`` (entity positions) are ignored.
    """
    ids = np.zeros(len(sentence.tokens), dtype=np.int64)
    assigned = np.zeros(len(sentence.tokens), dtype=bool)
    for k, ent in enumerate(sentence.entities):
        if k in exclude:
            continue
        span = slice(ent.start, ent.end)
        fresh = ~assigned[span]
        ids[span][fresh] = vocab.type_id(ent.etype)
        assigned[span] = True
    return ids
