"""Finite-difference gradient checking helpers shared by the test suite."""

import numpy as np

H = 1e-5
TOLERANCE = 1e-4


def numerical_grad(f, x, h=H):
    """Central finite differences of the scalar function f w.r.t. array x.

    f takes no arguments and must see in-place changes to x (pass a closure
    over the live array).
    """
    grad = np.zeros_like(x)
    flat = x.ravel()
    grad_flat = grad.ravel()
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        hi = f()
        flat[i] = original - h
        lo = f()
        flat[i] = original
        grad_flat[i] = (hi - lo) / (2.0 * h)
    return grad


def rel_err(analytic, numeric):
    """Norm-relative deviation; 0 when both gradients vanish."""
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0.0:
        return 0.0
    return np.linalg.norm(analytic - numeric) / denom


def jitter_params(model, rng, scale=0.05):
    """Shift every parameter (biases included) off zero.

    Freshly initialized biases are exactly 0, which parks ReLU
    preactivations on their kink whenever the incoming activations die;
    there the subgradient convention and central differences legitimately
    disagree. Checking at a generic point avoids that artifact.
    """
    for _, arr in model.named_arrays():
        arr += rng.normal(scale=scale, size=arr.shape)
