"""Adam with bias correction; epsilon sits outside the square root."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import NumericError, ShapeError

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


class AdamState:
    """First/second moment estimates mirroring the parameter shapes, plus t."""

    def __init__(self, params: dict[str, np.ndarray]):
        self.t = 0
        self.m = {name: np.zeros_like(arr) for name, arr in params.items()}
        self.v = {name: np.zeros_like(arr) for name, arr in params.items()}

    def save(self, path: str | Path) -> None:
        arrays = {f"m:{k}": v for k, v in self.m.items()}
        arrays.update({f"v:{k}": v for k, v in self.v.items()})
        with open(path, "wb") as fh:
            np.savez(fh, t=np.int64(self.t), **arrays)

    @classmethod
    def load(cls, path: str | Path) -> "AdamState":
        with np.load(path) as data:
            state = cls.__new__(cls)
            state.t = int(data["t"])
            state.m = {k[2:]: data[k] for k in data.files if k.startswith("m:")}
            state.v = {k[2:]: data[k] for k in data.files if k.startswith("v:")}
        return state


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One Adam update, in place on params and state.

    m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2
    theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
    """
    if params.keys() != grads.keys() or params.keys() != state.m.keys():
        raise ShapeError("params, grads and optimizer state name different tensors")
    for name, grad in grads.items():
        if grad.shape != params[name].shape:
            raise ShapeError(
                f"gradient for '{name}' has shape {grad.shape}, parameter is {params[name].shape}"
            )
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite gradient for '{name}'")

    state.t += 1
    bias1 = 1.0 - BETA1 ** state.t
    bias2 = 1.0 - BETA2 ** state.t
    for name, grad in grads.items():
        m = state.m[name]
        v = state.v[name]
        m *= BETA1
        m += (1.0 - BETA1) * grad
        v *= BETA2
        v += (1.0 - BETA2) * np.square(grad)
        params[name] -= lr * (m / bias1) / (np.sqrt(v / bias2) + EPSILON)
    return params, state
