"""Named trainable tensors, each flagged as bias or weight for L2."""

from __future__ import annotations

from collections import OrderedDict
from typing import Iterator

import numpy as np

from .numerics import Tensor


class ModelParams:
    """Ordered registry of parameters.

    Every entry must be registered with an explicit ``bias`` flag; the L2
    penalty skips biases.
    """

    def __init__(self) -> None:
        self._tensors: OrderedDict[str, Tensor] = OrderedDict()
        self._bias: dict[str, bool] = {}
        self.frozen: set[str] = set()

    def add(self, name: str, values, *, bias: bool) -> Tensor:
        if name in self._tensors:
            raise KeyError(f"parameter {name!r} already registered")
        if not isinstance(bias, bool):
            raise TypeError(f"parameter {name!r} needs an explicit bias flag")
        t = Tensor(np.array(values, dtype=np.float64), requires_grad=True, op=name)
        self._tensors[name] = t
        self._bias[name] = bias
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self):
        return self._tensors.items()

    def names(self) -> list[str]:
        return list(self._tensors)

    def is_bias(self, name: str) -> bool:
        return self._bias[name]

    def trainable(self) -> list[tuple[str, Tensor]]:
        return [(k, t) for k, t in self._tensors.items() if k not in self.frozen]

    def weights(self) -> list[Tensor]:
        """Non-bias parameters (the ones L2 regularizes)."""
        return [t for k, t in self.trainable() if not self._bias[k]]

    def zero_grad(self) -> None:
        for t in self._tensors.values():
            t.zero_grad()

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: t.data.copy() for k, t in self._tensors.items()}

    def load(self, values: dict[str, np.ndarray]) -> None:
        for k, t in self._tensors.items():
            if values[k].shape != t.data.shape:
                raise ValueError(f"{k}: shape {values[k].shape} does not match {t.data.shape}")
            t.data[...] = values[k]

    def count(self) -> int:
        return int(sum(t.size for t in self._tensors.values()))
