"""Dense float64 tensors with tape-free reverse-mode differentiation.

Every differentiable primitive builds its output eagerly with numpy and
attaches a closure that maps the output gradient to input gradients.
:func:`trace` recovers the computation record (a topological ordering of
the graph reachable from a tensor) and :func:`backward` walks it in reverse.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterator, Sequence

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


class DivergenceError(FloatingPointError):
    """Raised when a loss, gradient or update stops being finite."""


_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording inside the block (inference mode)."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """A float64 array with an optional gradient slot.

    Leaves created with ``requires_grad=True`` are parameters; tensors
    produced by primitives remember their parents and a backward closure.
    """

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, op: str = "leaf"):
        self.data = np.asarray(data, dtype=np.float64)
        if self.data.ndim == 0:
            self.data = self.data.reshape(())
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.op = op
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], Sequence[np.ndarray | None]] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def values(self) -> np.ndarray:
        """Row-major flat view of the data."""
        return self.data.reshape(-1)

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op!r}, requires_grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, parents: Sequence[Tensor], backward, op: str) -> Tensor:
    out = Tensor(data, op=op)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(a: Tensor, b: Tensor, name: str) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{name}: incompatible shapes {a.shape} and {b.shape}") from None


# ---------------------------------------------------------------------------
# arithmetic


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _make(a.data + b.data, (a, b), backward, "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _make(a.data - b.data, (a, b), backward, "sub")


def mul(a, b) -> Tensor:
    """Elementwise (Hadamard) product with numpy broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "multiply")

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _make(a.data * b.data, (a, b), backward, "multiply")


def matmul(a, b) -> Tensor:
    """``a @ b`` for ``a`` of shape (..., k) and a 2-D ``b`` of shape (k, n)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim != 2 or a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    k, n = b.shape

    def backward(g):
        ga = g @ b.data.T if a.requires_grad else None
        gb = a.data.reshape(-1, k).T @ g.reshape(-1, n) if b.requires_grad else None
        return ga, gb

    return _make(a.data @ b.data, (a, b), backward, "matmul")


def transpose(x) -> Tensor:
    x = as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeError(f"transpose expects a matrix, got {x.shape}")
    return _make(x.data.T, (x,), lambda g: (g.T,), "transpose")


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    original = x.shape
    return _make(x.data.reshape(shape), (x,), lambda g: (g.reshape(original),), "reshape")


def sum(x, axis=None) -> Tensor:  # noqa: A001 - mirrors numpy naming
    x = as_tensor(x)
    shape = x.shape

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return _make(np.asarray(x.data.sum(axis=axis)), (x,), backward, "sum")


def sum_squares(x) -> Tensor:
    x = as_tensor(x)
    return _make(np.asarray(np.vdot(x.data, x.data)), (x,), lambda g: (2.0 * g * x.data,), "sum_squares")


# ---------------------------------------------------------------------------
# nonlinearities


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    # two-branch form avoids overflow in exp for large |x|
    z = np.exp(-np.abs(x.data))
    y = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return _make(y, (x,), lambda g: (g * y * (1.0 - y),), "sigmoid")


def tanh(x) -> Tensor:
    x = as_tensor(x)
    y = np.tanh(x.data)
    return _make(y, (x,), lambda g: (g * (1.0 - y * y),), "tanh")


def _softmax_backward(y: np.ndarray, g: np.ndarray, axis: int) -> np.ndarray:
    return y * (g - (g * y).sum(axis=axis, keepdims=True))


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    return _make(y, (x,), lambda g: (_softmax_backward(y, g, axis),), "softmax")


def masked_softmax(x, mask: np.ndarray, axis: int = -1) -> Tensor:
    """Softmax restricted to positions where ``mask`` is true.

    Masked positions get probability 0; a slice with no valid position is
    all zeros rather than NaN.
    """
    x = as_tensor(x)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape:
        raise ShapeError(f"masked_softmax: mask {mask.shape} does not match {x.shape}")
    masked = np.where(mask, x.data, -np.inf)
    peak = masked.max(axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    e = np.where(mask, np.exp(np.where(mask, x.data, 0.0) - peak), 0.0)
    total = e.sum(axis=axis, keepdims=True)
    y = np.divide(e, total, out=np.zeros_like(e), where=total > 0)
    return _make(y, (x,), lambda g: (_softmax_backward(y, g, axis),), "masked_softmax")


def log_softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    y = shifted - lse
    p = np.exp(y)
    return _make(y, (x,), lambda g: (g - p * g.sum(axis=axis, keepdims=True),), "log_softmax")


def nll_sum(logits, labels: np.ndarray) -> Tensor:
    """Summed negative log-likelihood of integer ``labels`` under row softmaxes."""
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.data.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(f"nll_sum: logits {logits.shape} vs labels {labels.shape}")
    rows = np.arange(labels.size)
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    loss = np.asarray((lse - shifted[rows, labels]).sum())

    def backward(g):
        p = np.exp(shifted - lse[:, None])
        p[rows, labels] -= 1.0
        return (g * p,)

    return _make(loss, (logits,), backward, "nll_sum")


def dropout(x, p: float, rng: np.random.Generator | None = None, training: bool = True) -> Tensor:
    """Inverted dropout: zero with probability ``p``, scale survivors by 1/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must lie in [0, 1), got {p}")
    x = as_tensor(x)
    if not training or p == 0.0:
        return x
    if rng is None:
        raise ValueError("training-time dropout needs a random generator")
    keep = 1.0 - p
    mask = (rng.random(x.shape) < keep) / keep
    return _make(x.data * mask, (x,), lambda g: (g * mask,), "dropout")


# ---------------------------------------------------------------------------
# structure


def concat(tensors: Sequence, axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    ndim = tensors[0].data.ndim
    ax = axis % ndim
    for t in tensors[1:]:
        if t.data.ndim != ndim or any(
            t.shape[d] != tensors[0].shape[d] for d in range(ndim) if d != ax
        ):
            raise ShapeError(f"concat: incompatible shapes {[t.shape for t in tensors]}")
    bounds = np.cumsum([0] + [t.shape[ax] for t in tensors])

    def backward(g):
        return tuple(
            np.take(g, np.arange(lo, hi), axis=ax) for lo, hi in zip(bounds[:-1], bounds[1:])
        )

    return _make(np.concatenate([t.data for t in tensors], axis=ax), tensors, backward, "concat")


def stack(tensors: Sequence, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    shape = tensors[0].shape
    if any(t.shape != shape for t in tensors):
        raise ShapeError(f"stack: shapes differ {[t.shape for t in tensors]}")

    def backward(g):
        return tuple(np.moveaxis(g, axis, 0))

    return _make(np.stack([t.data for t in tensors], axis=axis), tensors, backward, "stack")


def broadcast_to(x, shape) -> Tensor:
    x = as_tensor(x)
    try:
        y = np.broadcast_to(x.data, shape)
    except ValueError:
        raise ShapeError(f"broadcast_to: cannot broadcast {x.shape} to {tuple(shape)}") from None
    return _make(y, (x,), lambda g: (_unbroadcast(g, x.shape),), "broadcast")


def slice_axis(x, start: int, stop: int, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    index = [slice(None)] * x.data.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)

    def backward(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return _make(x.data[index], (x,), backward, "slice")


def take(x, indices, axis: int = 0) -> Tensor:
    """Gather along ``axis`` (embedding lookup when ``axis=0``).

    Gradients scatter-add back, so repeated indices accumulate and rows that
    were never gathered receive zero.
    """
    x = as_tensor(x)
    indices = np.asarray(indices, dtype=np.int64)
    ax = axis % x.data.ndim
    if indices.size and (indices.min() < -x.shape[ax] or indices.max() >= x.shape[ax]):
        raise IndexError(f"take: index out of range for axis of length {x.shape[ax]}")

    def backward(g):
        full = np.zeros_like(x.data)
        if ax == 0:
            np.add.at(full, indices, g)
        else:
            moved = np.moveaxis(full, ax, 0)
            np.add.at(moved, indices, np.moveaxis(g, range(ax, ax + indices.ndim), range(indices.ndim)))
        return (full,)

    return _make(np.take(x.data, indices, axis=ax), (x,), backward, "take")


# ---------------------------------------------------------------------------
# differentiation


def trace(root: Tensor) -> list[Tensor]:
    """Return the computation record reachable from ``root``.

    The list is topologically ordered: each tensor appears after all of its
    inputs. Only tensors that participate in differentiation are included.
    """
    order: list[Tensor] = []
    seen: set[int] = set()
    stack_: list[tuple[Tensor, bool]] = [(root, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen and parent.requires_grad:
                stack_.append((parent, False))
    return order


def backward(loss: Tensor, record: list[Tensor] | None = None) -> None:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every reachable leaf."""
    if loss.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    record = trace(loss) if record is None else record
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(record):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.is_leaf:
            if node.grad is None:
                node.grad = np.zeros_like(node.data)
            node.grad += g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
