"""Deterministic synthetic corpora with relations recoverable from surface cues.

A sentence is a chain of entity mentions separated by filler words and a
connector. Between each pair of neighbouring mentions at most one *rule*
fires; a firing rule writes its trigger word as the connector and emits its
relation. *Chain* rules then compose two neighbouring relations
``X(a, b)`` and ``Y(b, c)`` into ``Z(a, c)``, a two-hop relation.

Generator configs are JSON objects::

    {
      "entity_types": {"PER": ["anna", "the coach"], "GPE": ["paris"]},
      "filler": ["the", "said"],
      "connectors": ["and", ","],
      "gap": {"min": 0, "max": 2},
      "entities": {"min": 2, "max": 12},
      "rules": [{"name": "soc", "relation": "PER-SOC", "left": "PER", "right": "PER",
                 "trigger": "with", "probability": 0.4, "direction": "l2r"}],
      "chains": [{"first": "PER-SOC", "second": "PHYS", "relation": "PHYS"}]
    }

``direction`` is ``l2r`` when the left mention is the first argument.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .dataset import EntityMention, GoldRelation, Sentence


class GeneratorConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    name: str
    relation: str
    left: str
    right: str
    trigger: str
    probability: float
    direction: str = "l2r"


@dataclass(frozen=True)
class Chain:
    first: str
    second: str
    relation: str


@dataclass
class GeneratorConfig:
    entity_types: dict[str, list[list[str]]]
    filler: list[str]
    connectors: list[str]
    gap: tuple[int, int] = (0, 2)
    entities: tuple[int, int] = (2, 12)
    rules: list[Rule] = field(default_factory=list)
    chains: list[Chain] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        types = set(self.entity_types)
        if not types:
            raise GeneratorConfigError("at least one entity type is required")
        for name, surfaces in self.entity_types.items():
            if not surfaces or any(not s for s in surfaces):
                raise GeneratorConfigError(f"entity type {name!r} needs non-empty surface forms")
        lo, hi = self.entities
        if not 2 <= lo <= hi:
            raise GeneratorConfigError(f"entity count range {self.entities} must satisfy 2 <= min <= max")
        if not 0 <= self.gap[0] <= self.gap[1]:
            raise GeneratorConfigError(f"gap range {self.gap} is invalid")
        if not self.connectors:
            raise GeneratorConfigError("connectors must not be empty")
        if self.gap[1] > 0 and not self.filler:
            raise GeneratorConfigError("filler words are required when gap max > 0")
        triggers = {r.trigger for r in self.rules}
        if triggers & set(self.connectors):
            raise GeneratorConfigError("trigger words must not double as plain connectors")
        totals: dict[tuple[str, str], float] = {}
        for rule in self.rules:
            for t in (rule.left, rule.right):
                if t not in types:
                    raise GeneratorConfigError(f"rule {rule.name!r} references unknown entity type {t!r}")
            if not 0.0 <= rule.probability <= 1.0:
                raise GeneratorConfigError(f"rule {rule.name!r} probability outside [0, 1]")
            if rule.direction not in ("l2r", "r2l"):
                raise GeneratorConfigError(f"rule {rule.name!r} direction must be l2r or r2l")
            key = (rule.left, rule.right)
            totals[key] = totals.get(key, 0.0) + rule.probability
            if totals[key] > 1.0 + 1e-12:
                raise GeneratorConfigError(f"rules for types {key} have total probability above 1")
        relations = {r.relation for r in self.rules}
        for chain in self.chains:
            for rel in (chain.first, chain.second):
                if rel not in relations:
                    raise GeneratorConfigError(f"chain references unknown relation {rel!r}")

    @property
    def relation_types(self) -> list[str]:
        return sorted({r.relation for r in self.rules} | {c.relation for c in self.chains})

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorConfig":
        try:
            return cls(
                entity_types={k: [s.split() for s in v] for k, v in obj["entity_types"].items()},
                filler=list(obj.get("filler", [])),
                connectors=list(obj["connectors"]),
                gap=(int(obj.get("gap", {}).get("min", 0)), int(obj.get("gap", {}).get("max", 2))),
                entities=(int(obj["entities"]["min"]), int(obj["entities"]["max"])),
                rules=[Rule(**r) for r in obj.get("rules", [])],
                chains=[Chain(**c) for c in obj.get("chains", [])],
            )
        except (KeyError, TypeError) as exc:
            raise GeneratorConfigError(f"malformed generator config: {exc}") from None

    def to_json(self) -> dict:
        return {
            "entity_types": {k: [" ".join(s) for s in v] for k, v in self.entity_types.items()},
            "filler": self.filler,
            "connectors": self.connectors,
            "gap": {"min": self.gap[0], "max": self.gap[1]},
            "entities": {"min": self.entities[0], "max": self.entities[1]},
            "rules": [vars(r) for r in self.rules],
            "chains": [vars(c) for c in self.chains],
        }


def load_generator_config(source: str | Path) -> GeneratorConfig:
    """Read a generator config from a path or a shipped name (``default``, ``two_hop``)."""
    path = Path(source)
    if not path.exists():
        path = Path(str(resources.files("walkre") / "presets" / f"synthetic_{source}.json"))
    return GeneratorConfig.from_json(json.loads(path.read_text(encoding="utf-8")))


@dataclass
class GenerationTrace:
    """Per-rule bookkeeping: eligible slots seen and times fired."""

    eligible: dict[str, int] = field(default_factory=dict)
    fired: dict[str, int] = field(default_factory=dict)


def generate_synthetic(
    config: GeneratorConfig,
    n_sentences: int,
    seed: int,
    trace: GenerationTrace | None = None,
) -> list[Sentence]:
    rng = np.random.default_rng(seed)
    type_names = sorted(config.entity_types)
    return [_sentence(config, type_names, rng, trace) for _ in range(n_sentences)]


def _pick(rng: np.random.Generator, items):
    return items[int(rng.integers(len(items)))]


def _sentence(config: GeneratorConfig, type_names, rng, trace) -> Sentence:
    n = int(rng.integers(config.entities[0], config.entities[1] + 1))
    types = [_pick(rng, type_names) for _ in range(n)]
    tokens: list[str] = []
    entities: list[EntityMention] = []
    adjacent: dict[int, tuple[str, str]] = {}  # a -> (relation, direction) between a and a+1
    relations: list[GoldRelation] = []

    for a, etype in enumerate(types):
        for _ in range(int(rng.integers(config.gap[0], config.gap[1] + 1))):
            tokens.append(_pick(rng, config.filler))
        surface = _pick(rng, config.entity_types[etype])
        entities.append(EntityMention(f"T{a + 1}", len(tokens), len(tokens) + len(surface), etype))
        tokens.extend(surface)
        if a == n - 1:
            break
        rule = _fire(config, etype, types[a + 1], rng, trace)
        if rule is None:
            tokens.append(_pick(rng, config.connectors))
            continue
        tokens.append(rule.trigger)
        adjacent[a] = (rule.relation, rule.direction)
        left, right = f"T{a + 1}", f"T{a + 2}"
        if rule.direction == "l2r":
            relations.append(GoldRelation(left, right, rule.relation))
        else:
            relations.append(GoldRelation(right, left, rule.relation))

    for a in range(n - 2):
        first, second = adjacent.get(a), adjacent.get(a + 1)
        if not first or not second or first[1] != "l2r" or second[1] != "l2r":
            continue
        for chain in config.chains:
            if chain.first == first[0] and chain.second == second[0]:
                relations.append(GoldRelation(f"T{a + 1}", f"T{a + 3}", chain.relation))
                break
    return Sentence(tokens, entities, relations)


def _fire(config: GeneratorConfig, left: str, right: str, rng, trace) -> Rule | None:
    u = rng.random()
    cumulative = 0.0
    chosen = None
    for rule in config.rules:
        if rule.left != left or rule.right != right:
            continue
        if trace is not None:
            trace.eligible[rule.name] = trace.eligible.get(rule.name, 0) + 1
        cumulative += rule.probability
        if chosen is None and u < cumulative:
            chosen = rule
    if chosen is not None and trace is not None:
        trace.fired[chosen.name] = trace.fired.get(chosen.name, 0) + 1
    return chosen
