"""Walk construction and aggregation over the sentence entity graph.

An edge tensor holds one vector per ordered entity pair, shape (n, n, n_b),
with the diagonal fixed at zero. One aggregation step maps walks of length
one-to-lambda to walks of length one-to-2*lambda:

    v2[i, j] = beta * v[i, j]
               + (1 - beta) * sum_{k != i, j} sigmoid(v[i, k] * (W_b @ v[k, j]))
"""

from __future__ import annotations

import numpy as np

from .numerics import (
    Tensor,
    add,
    concat,
    matmul,
    mul,
    reshape,
    sigmoid,
    sum,
    take,
    transpose,
)


def walk_combine(v_ik: Tensor, v_kj: Tensor, w_b: Tensor) -> Tensor:
    """Merge two consecutive edges into one two-step walk vector."""
    n_b = w_b.shape[0]
    projected = reshape(matmul(reshape(v_kj, (1, n_b)), transpose(w_b)), (n_b,))
    return sigmoid(mul(v_ik, projected))


def intermediate_mask(n: int) -> np.ndarray:
    """mask[i, k, j] is true when k is a valid intermediate node for pair (i, j)."""
    i, k, j = np.ogrid[:n, :n, :n]
    return (k != i) & (k != j) & (i != j)


def walk_aggregate(edges: Tensor, w_b: Tensor, beta: float) -> Tensor:
    """One doubling step over every ordered pair, computed from the input tensor only."""
    n, _, n_b = edges.shape
    if n < 2:
        raise ValueError(f"walk aggregation needs at least two entities, got {n}")
    # projected[k, j] = W_b @ v[k, j]
    projected = matmul(edges, transpose(w_b))
    left = reshape(edges, (n, n, 1, n_b))  # v[i, k] at [i, k, :, :]
    right = reshape(projected, (1, n, n, n_b))  # W_b v[k, j] at [:, k, j, :]
    combined = sigmoid(mul(left, right))  # [i, k, j, :]
    mask = intermediate_mask(n).astype(np.float64)[..., None]
    extended = sum(mul(combined, mask), axis=1)  # [i, j, :]
    return add(mul(edges, beta), mul(extended, 1.0 - beta))


def aggregate_to_length(edges: Tensor, length: int, w_b: Tensor, beta: float) -> Tensor:
    """Apply ``walk_aggregate`` log2(length) times; ``length == 1`` is the identity."""
    if length < 1 or length & (length - 1):
        raise ValueError(f"walk length must be a power of two, got {length}")
    steps = int(np.log2(length))
    for _ in range(steps):
        edges = walk_aggregate(edges, w_b, beta)
    return edges


def scatter_pairs(pair_vectors: Tensor, heads: np.ndarray, tails: np.ndarray, n: int) -> Tensor:
    """Place (P, n_b) pair rows into an (n, n, n_b) tensor with a zero diagonal."""
    n_pairs, n_b = pair_vectors.shape
    source = np.full(n * n, n_pairs, dtype=np.int64)
    source[heads * n + tails] = np.arange(n_pairs)
    rows = concat([pair_vectors, Tensor(np.zeros((1, n_b)))], axis=0)
    return reshape(take(rows, source), (n, n, n_b))


def gather_pairs(edges: Tensor, heads: np.ndarray, tails: np.ndarray) -> Tensor:
    n, _, n_b = edges.shape
    return take(reshape(edges, (n * n, n_b)), heads * n + tails)
