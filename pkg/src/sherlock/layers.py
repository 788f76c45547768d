"""Network primitives as explicit forward/backward pairs on float64 arrays.

There is no autograd here: every forward has a hand-derived backward, and
the test suite checks each pair against central finite differences.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, ShapeError

PROB_FLOOR = 1e-12


class Mode(Enum):
    TRAIN = "train"
    INFER = "infer"


def embedding_forward(ids: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Row lookup: out[i] = table[ids[i]]. Padding id 0 is an ordinary row."""
    ids = np.asarray(ids, dtype=np.int64)
    vocab_size = table.shape[0]
    bad = np.nonzero((ids < 0) | (ids >= vocab_size))[0]
    if bad.size:
        raise ShapeError(
            f"token id {int(ids[bad[0]])} at position {int(bad[0])} is outside "
            f"the embedding table ({vocab_size} rows)"
        )
    return table[ids]


def embedding_backward(ids: np.ndarray, grad_out: np.ndarray, vocab_size: int) -> np.ndarray:
    """Scatter-add the per-position gradients back onto the looked-up rows."""
    grad_table = np.zeros((vocab_size, grad_out.shape[1]))
    np.add.at(grad_table, np.asarray(ids, dtype=np.int64), grad_out)
    return grad_table


def _conv_windows(x: np.ndarray, width: int) -> np.ndarray:
    # (L, C) -> (L-K+1, C, K); a view, no copy
    return sliding_window_view(x, width, axis=0)


def conv1d_forward(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Valid (unpadded) 1D convolution.

    out[t, f] = bias[f] + sum_{k, c} x[t+k, c] * kernels[f, k, c]
    """
    if x.ndim != 2 or kernels.ndim != 3:
        raise ShapeError(f"conv1d expects (L,C) input and (F,K,C) kernels, got {x.shape} and {kernels.shape}")
    seq_len, channels = x.shape
    filters, width, kernel_channels = kernels.shape
    if kernel_channels != channels:
        raise ShapeError(f"kernels carry {kernel_channels} channels but input has {channels}")
    if bias.shape != (filters,):
        raise ShapeError(f"bias shape {bias.shape} does not match {filters} filters")
    if seq_len < width:
        raise ShapeError(
            f"sequence of {seq_len} positions is shorter than the kernel width {width}"
        )
    windows = _conv_windows(x, width)  # (T, C, K)
    out_len = seq_len - width + 1
    flat = windows.reshape(out_len, channels * width)
    # kernels (F,K,C) -> (C,K,F) flattened to match windows' (c,k) layout
    weight = kernels.transpose(2, 1, 0).reshape(channels * width, filters)
    return flat @ weight + bias


def conv1d_backward(
    x: np.ndarray, kernels: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients w.r.t. input, kernels and bias for conv1d_forward."""
    seq_len, channels = x.shape
    filters, width, _ = kernels.shape
    out_len = seq_len - width + 1
    if grad_out.shape != (out_len, filters):
        raise ShapeError(f"upstream grad {grad_out.shape} does not match conv output ({out_len}, {filters})")
    grad_bias = grad_out.sum(axis=0)
    windows = _conv_windows(x, width).reshape(out_len, channels * width)
    grad_w = (grad_out.T @ windows).reshape(filters, channels, width).transpose(0, 2, 1)
    grad_x = np.zeros_like(x)
    for k in range(width):
        grad_x[k : k + out_len] += grad_out @ kernels[:, k, :]
    return grad_x, np.ascontiguousarray(grad_w), grad_bias


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    # subgradient at 0 is taken as 0
    return np.where(x > 0.0, grad_out, 0.0)


def global_maxpool_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature max over the whole sequence; returns (pooled, argmax rows)."""
    if x.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"cannot max-pool over an empty sequence, got shape {x.shape}")
    argmax = np.argmax(x, axis=0)  # first occurrence wins ties
    return x[argmax, np.arange(x.shape[1])], argmax


def global_maxpool_backward(argmax: np.ndarray, seq_len: int, grad_out: np.ndarray) -> np.ndarray:
    grad_x = np.zeros((seq_len, grad_out.shape[0]))
    grad_x[argmax, np.arange(grad_out.shape[0])] = grad_out
    return grad_x


def dropout_forward(
    x: np.ndarray,
    rate: float,
    mode: Mode,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout: train-time survivors are scaled by 1/(1-rate).

    Returns (output, mask); the mask is None whenever dropout was a no-op.
    """
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    if mode is Mode.INFER or rate == 0.0:
        return x, None
    if rng is None:
        raise ConfigError("training-mode dropout needs a seeded generator")
    mask = rng.random(x.shape) >= rate
    return x * mask / (1.0 - rate), mask


def dropout_backward(grad_out: np.ndarray, mask: np.ndarray | None, rate: float) -> np.ndarray:
    if mask is None:
        return grad_out
    return grad_out * mask / (1.0 - rate)


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """out = x @ weights + bias for a single feature vector."""
    if weights.ndim != 2 or x.shape != (weights.shape[0],) or bias.shape != (weights.shape[1],):
        raise ShapeError(
            f"dense shapes disagree: input {x.shape}, weights {weights.shape}, bias {bias.shape}"
        )
    return x @ weights + bias


def dense_backward(
    x: np.ndarray, weights: np.ndarray, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (grad_input, grad_weights, grad_bias)."""
    return weights @ grad_out, np.outer(x, grad_out), grad_out.copy()


def softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - np.max(x)
    exps = np.exp(shifted)
    return exps / exps.sum()


def cross_entropy(probs: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Categorical cross-entropy against a one-hot target.

    Returns (loss, gradient w.r.t. the pre-softmax logits); the fused
    softmax + cross-entropy gradient is simply probs - target.
    """
    target = np.asarray(target, dtype=np.float64)
    if target.shape != probs.shape:
        raise ConfigError(f"target shape {target.shape} does not match probs {probs.shape}")
    if not np.isin(target, (0.0, 1.0)).all() or target.sum() != 1.0:
        raise ConfigError(f"target must be one-hot, got {target}")
    idx = int(np.argmax(target))
    loss = -float(np.log(max(probs[idx], PROB_FLOOR)))
    return loss, probs - target
