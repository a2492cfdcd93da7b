"""Corpus ingestion, vocabularies and ordered-pair instance generation.

Corpus files are UTF-8 JSON lines, one sentence per line::

    {"tokens": ["Larsen", "was", ...],
     "entities": [{"id": "T1", "start": 0, "end": 1, "type": "PER"}, ...],
     "relations": [{"arg1": "T1", "arg2": "T3", "type": "PHYS"}]}

Entity spans are token offsets, ``start`` inclusive and ``end`` exclusive.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

PAD = "<pad>"
UNK = "<unk>"
NULL_TYPE = "<none>"
NO_RELATION = None

L2R = "l2r"
R2L = "r2l"

MAX_OFFSET = 60
# buckets: far-left, -60..+60, far-right
POSITION_BUCKETS = 2 * MAX_OFFSET + 3


class CorpusFormatError(ValueError):
    """A corpus line or sentence violates the format or its invariants."""


@dataclass(frozen=True)
class EntityMention:
    id: str
    start: int
    end: int
    etype: str

    @property
    def anchor(self) -> int:
        """Token index used for relative positions (the first token)."""
        return self.start

    @property
    def tokens(self) -> range:
        return range(self.start, self.end)


@dataclass(frozen=True)
class GoldRelation:
    arg1: str
    arg2: str
    rtype: str


@dataclass
class Sentence:
    tokens: list[str]
    entities: list[EntityMention] = field(default_factory=list)
    relations: list[GoldRelation] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        n = len(self.tokens)
        ids = set()
        for ent in self.entities:
            if not 0 <= ent.start < ent.end <= n:
                raise CorpusFormatError(
                    f"entity {ent.id!r} span [{ent.start}, {ent.end}) outside {n} tokens"
                )
            if ent.id in ids:
                raise CorpusFormatError(f"duplicate entity id {ent.id!r}")
            ids.add(ent.id)
        for rel in self.relations:
            if rel.arg1 == rel.arg2:
                raise CorpusFormatError(f"relation {rel.rtype!r} links {rel.arg1!r} to itself")
            for arg in (rel.arg1, rel.arg2):
                if arg not in ids:
                    raise CorpusFormatError(f"relation {rel.rtype!r} references unknown entity {arg!r}")

    def entity(self, entity_id: str) -> EntityMention:
        for ent in self.entities:
            if ent.id == entity_id:
                return ent
        raise KeyError(entity_id)

    def entity_index(self) -> dict[str, int]:
        return {ent.id: k for k, ent in enumerate(self.entities)}

    def to_json(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "entities": [
                {"id": e.id, "start": e.start, "end": e.end, "type": e.etype} for e in self.entities
            ],
            "relations": [{"arg1": r.arg1, "arg2": r.arg2, "type": r.rtype} for r in self.relations],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Sentence":
        if not isinstance(obj, dict):
            raise CorpusFormatError("sentence must be a JSON object")
        try:
            tokens = obj["tokens"]
            entities = [
                EntityMention(str(e["id"]), int(e["start"]), int(e["end"]), str(e["type"]))
                for e in obj.get("entities", [])
            ]
            relations = [
                GoldRelation(str(r["arg1"]), str(r["arg2"]), str(r["type"]))
                for r in obj.get("relations", [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(f"missing or malformed field: {exc}") from None
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise CorpusFormatError("tokens must be an array of strings")
        return cls(list(tokens), entities, relations)


def parse_corpus(path: str | Path) -> list[Sentence]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                sentences.append(Sentence.from_json(json.loads(line)))
            except (json.JSONDecodeError, CorpusFormatError) as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
    return sentences


def serialize_sentence(sentence: Sentence) -> str:
    return json.dumps(sentence.to_json(), ensure_ascii=False)


def write_corpus(sentences: Iterable[Sentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sentences:
            fh.write(serialize_sentence(s) + "\n")


# ---------------------------------------------------------------------------
# positions


def relative_position(from_token: int, to_token: int) -> int:
    """Signed offset of ``from_token`` relative to ``to_token``.

    Negative when the word precedes the anchor in reading order.
    """
    return from_token - to_token


def clip_offset(offset: int) -> int:
    if offset < -MAX_OFFSET:
        return -MAX_OFFSET - 1
    if offset > MAX_OFFSET:
        return MAX_OFFSET + 1
    return offset


def position_index(offset: int) -> int:
    """Row of the position table for a signed offset."""
    return clip_offset(offset) + MAX_OFFSET + 1


# ---------------------------------------------------------------------------
# vocabulary


@dataclass
class Vocabulary:
    words: list[str]
    entity_types: list[str]
    labels: list[tuple[str, str] | None]

    def __post_init__(self) -> None:
        self.word_index = {w: k for k, w in enumerate(self.words)}
        self.type_index = {t: k for k, t in enumerate(self.entity_types)}
        self.label_index_table = {lab: k for k, lab in enumerate(self.labels)}

    @property
    def relation_types(self) -> list[str]:
        return [lab[0] for lab in self.labels[1::2]]

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    @property
    def position_buckets(self) -> int:
        return POSITION_BUCKETS

    def word_id(self, word: str) -> int:
        return self.word_index.get(word, self.word_index[UNK])

    def type_id(self, etype: str | None) -> int:
        """Type-table row; ``None`` and unseen types map to the null row 0."""
        if etype is None:
            return 0
        return self.type_index.get(etype, 0)

    def label_id(self, label: tuple[str, str] | None) -> int:
        return self.label_index_table[label]

    def label(self, index: int) -> tuple[str, str] | None:
        return self.labels[index]

    def to_json(self) -> dict:
        return {
            "words": self.words,
            "entity_types": self.entity_types,
            "relation_types": self.relation_types,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Vocabulary":
        return cls(list(obj["words"]), list(obj["entity_types"]), label_table(obj["relation_types"]))


def label_table(relation_types: Iterable[str]) -> list[tuple[str, str] | None]:
    """No-relation at 0, then each relation type as (l2r, r2l) consecutively."""
    labels: list[tuple[str, str] | None] = [NO_RELATION]
    for rtype in sorted(set(relation_types)):
        labels.append((rtype, L2R))
        labels.append((rtype, R2L))
    return labels


def build_vocab(
    corpus: Sequence[Sentence],
    pretrained_words: Iterable[str] | None = None,
    relation_types: Iterable[str] | None = None,
    entity_types: Iterable[str] | None = None,
) -> Vocabulary:
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    words = {t for s in corpus for t in s.tokens}
    if pretrained_words is not None:
        words.update(pretrained_words)
    words.discard(PAD)
    words.discard(UNK)
    etypes = {e.etype for s in corpus for e in s.entities}
    if entity_types is not None:
        etypes.update(entity_types)
    rtypes = {r.rtype for s in corpus for r in s.relations}
    if relation_types is not None:
        rtypes.update(relation_types)
    return Vocabulary(
        words=[PAD, UNK] + sorted(words),
        entity_types=[NULL_TYPE] + sorted(etypes),
        labels=label_table(rtypes),
    )


# ---------------------------------------------------------------------------
# pair instances


@dataclass(frozen=True)
class PairInstance:
    head: int
    tail: int
    label: int
    relation: tuple[str, str] | None = None


def pair_relations(sentence: Sentence) -> dict[tuple[int, int], tuple[str, str]]:
    """Directional label for every ordered pair covered by a gold relation.

    A relation (a, b, r) labels (a, b) as (r, l2r) and (b, a) as (r, r2l).
    When two gold relations touch the same unordered pair the first one wins.
    """
    index = sentence.entity_index()
    out: dict[tuple[int, int], tuple[str, str]] = {}
    for rel in sentence.relations:
        a, b = index[rel.arg1], index[rel.arg2]
        if (a, b) in out or (b, a) in out:
            logger.warning("ignoring extra relation %s between %s and %s", rel.rtype, rel.arg1, rel.arg2)
            continue
        out[(a, b)] = (rel.rtype, L2R)
        out[(b, a)] = (rel.rtype, R2L)
    return out


def generate_pairs(sentence: Sentence, vocab: Vocabulary | None = None) -> list[PairInstance]:
    """All n(n-1) ordered entity pairs with directional labels.

    Entity positions in ``sentence.entities`` identify heads and tails. Without
    a vocabulary the label index is taken from the sentence's own relation
    inventory; relation types unknown to ``vocab`` fall back to no-relation.
    """
    n = len(sentence.entities)
    if n < 2:
        return []
    if vocab is None:
        labels = {lab: k for k, lab in enumerate(label_table(r.rtype for r in sentence.relations))}
    else:
        labels = vocab.label_index_table
    gold = pair_relations(sentence)
    pairs = []
    for i in range(n):
        for j in range(n):
            if i != j:
                rel = gold.get((i, j))
                pairs.append(PairInstance(i, j, labels.get(rel, 0), rel))
    return pairs
