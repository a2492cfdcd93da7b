from .optim import AdamState, adam_step, clip_gradients, global_norm
from .tensor import (
    DivergenceError,
    ShapeError,
    Tensor,
    add,
    as_tensor,
    backward,
    broadcast_to,
    concat,
    dropout,
    grad_enabled,
    log_softmax,
    masked_softmax,
    matmul,
    mul,
    nll_sum,
    no_grad,
    reshape,
    sigmoid,
    slice_axis,
    softmax,
    stack,
    sub,
    sum,
    sum_squares,
    take,
    tanh,
    trace,
    transpose,
)

__all__ = [
    "AdamState",
    "DivergenceError",
    "ShapeError",
    "Tensor",
    "adam_step",
    "add",
    "as_tensor",
    "backward",
    "broadcast_to",
    "clip_gradients",
    "concat",
    "dropout",
    "global_norm",
    "grad_enabled",
    "log_softmax",
    "masked_softmax",
    "matmul",
    "mul",
    "nll_sum",
    "no_grad",
    "reshape",
    "sigmoid",
    "slice_axis",
    "softmax",
    "stack",
    "sub",
    "sum",
    "sum_squares",
    "take",
    "tanh",
    "trace",
    "transpose",
]
