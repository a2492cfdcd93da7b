"""Training configuration, shipped presets and the ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path


@dataclass
class TrainConfig:
    lr: float = 0.002
    batch_size: int = 10
    walk_length: int = 4
    beta: float = 0.77
    n_w: int = 200
    n_p: int = 25
    n_t: int = 20
    n_e: int = 100
    n_s: int = 100
    input_dropout: float = 0.11
    output_dropout: float = 0.32
    l2: float = 5.7e-5
    clip: float = 24.4
    patience: int = 5
    max_epochs: int = 100
    seed: int = 1
    use_context: bool = True
    exclude_all_mentions: bool = False
    freeze_embeddings: bool = False
    lstm_hidden: int = 0  # per-direction size; 0 means n_e // 2

    def __post_init__(self) -> None:
        self.validate()

    @property
    def hidden_size(self) -> int:
        return self.lstm_hidden or self.n_e // 2

    @property
    def n_b(self) -> int:
        return self.n_s

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        for name in ("input_dropout", "output_dropout"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {rate}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.walk_length < 1 or self.walk_length & (self.walk_length - 1):
            raise ValueError(f"walk_length must be a power of two, got {self.walk_length}")
        if not self.lstm_hidden and self.n_e % 2:
            raise ValueError(f"n_e must be even to split across directions, got {self.n_e}")
        if self.clip <= 0:
            raise ValueError("clip must be positive")
        for name in ("n_w", "n_p", "n_t", "n_e", "n_s", "max_epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**values)


_FIELD_TYPES = {f.name: f.type for f in fields(TrainConfig)}


def coerce(key: str, raw: str, types: dict[str, str] | None = None):
    """Convert a textual value to the declared type of ``key``."""
    types = _FIELD_TYPES if types is None else types
    kind = types.get(key, "str")
    raw = raw.strip()
    if kind == "bool":
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_cfg(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        values[key] = value
    return values


def format_cfg(values: dict) -> str:
    lines = []
    for key, value in values.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


PRESET_NAMES = ("baseline", "l1", "l2", "l4", "l8")


def preset_path(name: str) -> Path:
    return Path(str(resources.files("walkre") / "presets" / f"{name}.cfg"))


def load_config(source: str | Path, overrides: dict | None = None) -> TrainConfig:
    """Load a preset by name or a ``.cfg`` path, then apply overrides.

    A missing path such as ``presets/l4.cfg`` whose stem names a preset
    resolves to the shipped copy.
    """
    path = Path(source)
    if not path.exists() and path.stem in PRESET_NAMES and path.suffix in ("", ".cfg"):
        path = preset_path(path.stem)
    raw = parse_cfg(path.read_text(encoding="utf-8"))
    values = {k: coerce(k, v) for k, v in raw.items()}
    values.update(overrides or {})
    return TrainConfig.from_dict(values)


def preset(name: str, **overrides) -> TrainConfig:
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return load_config(preset_path(name), overrides)
