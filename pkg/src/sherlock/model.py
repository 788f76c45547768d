"""The five-head token CNN: embedding -> conv -> pool -> dropout -> dense
stack -> five two-way softmax heads, with loss/backprop and prediction."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError
from .layers import (
    Mode,
    conv1d_backward,
    conv1d_forward,
    cross_entropy,
    dense_backward,
    dense_forward,
    dropout_backward,
    dropout_forward,
    embedding_backward,
    embedding_forward,
    global_maxpool_backward,
    global_maxpool_forward,
    relu,
    relu_backward,
    softmax,
)
from .tokenizer import DEFAULT_MAX_LEN, EncodedSample, Vocabulary, encode, lex

HEAD_NAMES = ("CWE-119", "CWE-120", "CWE-469", "CWE-476", "CWE-other")
NOT_VULNERABLE = np.array([1.0, 0.0])
VULNERABLE = np.array([0.0, 1.0])


@dataclass
class Hyperparams:
    vocab_size: int
    max_len: int = DEFAULT_MAX_LEN
    embed_dim: int = 13
    conv_filters: int = 512
    kernel_size: int = 9
    dense1: int = 64
    dense2: int = 16
    heads: int = 5
    head_width: int = 2
    dropout_rate: float = 0.5
    learning_rate: float = 0.005

    def validate(self) -> None:
        for name in ("vocab_size", "max_len", "embed_dim", "conv_filters",
                     "kernel_size", "dense1", "dense2", "heads", "head_width"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.vocab_size < 2:
            raise ConfigError(f"vocab_size must be >= 2 (ids 0 and 1 are reserved), got {self.vocab_size}")
        if self.max_len < self.kernel_size:
            raise ConfigError(f"max_len ({self.max_len}) must be >= kernel_size ({self.kernel_size})")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if self.learning_rate <= 0.0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Hyperparams":
        hp = cls(**data)
        hp.validate()
        return hp


def parameter_shapes(hp: Hyperparams) -> list[tuple[str, tuple[int, ...]]]:
    """Named parameter shapes in declaration (and serialization) order."""
    shapes: list[tuple[str, tuple[int, ...]]] = [
        ("embedding", (hp.vocab_size, hp.embed_dim)),
        ("conv_w", (hp.conv_filters, hp.kernel_size, hp.embed_dim)),
        ("conv_b", (hp.conv_filters,)),
        ("dense1_w", (hp.conv_filters, hp.dense1)),
        ("dense1_b", (hp.dense1,)),
        ("dense2_w", (hp.dense1, hp.dense2)),
        ("dense2_b", (hp.dense2,)),
    ]
    for i in range(hp.heads):
        shapes.append((f"head{i}_w", (hp.dense2, hp.head_width)))
        shapes.append((f"head{i}_b", (hp.head_width,)))
    return shapes


@dataclass
class ModelParams:
    """All learnable arrays plus the hyperparameters that fix their shapes."""

    hp: Hyperparams
    embedding: np.ndarray
    conv_w: np.ndarray
    conv_b: np.ndarray
    dense1_w: np.ndarray
    dense1_b: np.ndarray
    dense2_w: np.ndarray
    dense2_b: np.ndarray
    head_w: list[np.ndarray] = field(default_factory=list)
    head_b: list[np.ndarray] = field(default_factory=list)

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        """(name, array) pairs in declaration order; arrays are live references."""
        pairs = [
            ("embedding", self.embedding),
            ("conv_w", self.conv_w),
            ("conv_b", self.conv_b),
            ("dense1_w", self.dense1_w),
            ("dense1_b", self.dense1_b),
            ("dense2_w", self.dense2_w),
            ("dense2_b", self.dense2_b),
        ]
        for i, (w, b) in enumerate(zip(self.head_w, self.head_b)):
            pairs.append((f"head{i}_w", w))
            pairs.append((f"head{i}_b", b))
        return pairs

    def as_dict(self) -> dict[str, np.ndarray]:
        return dict(self.named_arrays())

    def param_count(self, include_embedding: bool = True) -> int:
        total = sum(arr.size for name, arr in self.named_arrays())
        if not include_embedding:
            total -= self.embedding.size
        return total

    def copy(self) -> "ModelParams":
        return ModelParams(
            hp=self.hp,
            embedding=self.embedding.copy(),
            conv_w=self.conv_w.copy(),
            conv_b=self.conv_b.copy(),
            dense1_w=self.dense1_w.copy(),
            dense1_b=self.dense1_b.copy(),
            dense2_w=self.dense2_w.copy(),
            dense2_b=self.dense2_b.copy(),
            head_w=[w.copy() for w in self.head_w],
            head_b=[b.copy() for b in self.head_b],
        )


@dataclass(frozen=True)
class ScanResult:
    """Per-head probability of the vulnerable class, in head order."""

    probabilities: dict[str, float]
    token_count: int


def init_model(hp: Hyperparams, seed: int | np.random.Generator = 0) -> ModelParams:
    """Fan-scaled uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.

    Arrays are drawn from one generator in declaration order, so a seed pins
    the whole initialization bit-for-bit.
    """
    hp.validate()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def uniform(shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=shape)

    receptive = hp.kernel_size * hp.embed_dim
    return ModelParams(
        hp=hp,
        embedding=uniform((hp.vocab_size, hp.embed_dim), hp.vocab_size, hp.embed_dim),
        conv_w=uniform((hp.conv_filters, hp.kernel_size, hp.embed_dim),
                       receptive, hp.kernel_size * hp.conv_filters),
        conv_b=np.zeros(hp.conv_filters),
        dense1_w=uniform((hp.conv_filters, hp.dense1), hp.conv_filters, hp.dense1),
        dense1_b=np.zeros(hp.dense1),
        dense2_w=uniform((hp.dense1, hp.dense2), hp.dense1, hp.dense2),
        dense2_b=np.zeros(hp.dense2),
        head_w=[uniform((hp.dense2, hp.head_width), hp.dense2, hp.head_width)
                for _ in range(hp.heads)],
        head_b=[np.zeros(hp.head_width) for _ in range(hp.heads)],
    )


def _forward(
    model: ModelParams,
    ids: np.ndarray,
    mode: Mode,
    rng: np.random.Generator | None = None,
) -> tuple[list[np.ndarray], dict]:
    hp = model.hp
    emb = embedding_forward(ids, model.embedding)
    conv = conv1d_forward(emb, model.conv_w, model.conv_b)
    conv_act = relu(conv)
    pooled, argmax = global_maxpool_forward(conv_act)
    dropped, mask = dropout_forward(pooled, hp.dropout_rate, mode, rng)
    pre1 = dense_forward(dropped, model.dense1_w, model.dense1_b)
    act1 = relu(pre1)
    pre2 = dense_forward(act1, model.dense2_w, model.dense2_b)
    act2 = relu(pre2)
    probs = [softmax(dense_forward(act2, w, b))
             for w, b in zip(model.head_w, model.head_b)]
    cache = {
        "ids": ids, "emb": emb, "conv": conv, "argmax": argmax,
        "seq_len": conv.shape[0], "mask": mask, "dropped": dropped,
        "pre1": pre1, "act1": act1, "pre2": pre2, "act2": act2,
    }
    return probs, cache


def forward(
    model: ModelParams,
    ids: np.ndarray,
    mode: Mode = Mode.INFER,
    rng: np.random.Generator | None = None,
) -> list[np.ndarray]:
    """Probability pair per head, each summing to 1."""
    probs, _ = _forward(model, ids, mode, rng)
    return probs


def _backward(
    model: ModelParams,
    cache: dict,
    grad_logits: list[np.ndarray],
    grads: dict[str, np.ndarray],
) -> None:
    hp = model.hp
    act2 = cache["act2"]
    grad_act2 = np.zeros_like(act2)
    for i, gz in enumerate(grad_logits):
        gx, gw, gb = dense_backward(act2, model.head_w[i], gz)
        grads[f"head{i}_w"] += gw
        grads[f"head{i}_b"] += gb
        grad_act2 += gx
    grad_pre2 = relu_backward(cache["pre2"], grad_act2)
    grad_act1, gw2, gb2 = dense_backward(cache["act1"], model.dense2_w, grad_pre2)
    grads["dense2_w"] += gw2
    grads["dense2_b"] += gb2
    grad_pre1 = relu_backward(cache["pre1"], grad_act1)
    grad_dropped, gw1, gb1 = dense_backward(cache["dropped"], model.dense1_w, grad_pre1)
    grads["dense1_w"] += gw1
    grads["dense1_b"] += gb1
    grad_pooled = dropout_backward(grad_dropped, cache["mask"], hp.dropout_rate)
    grad_conv_act = global_maxpool_backward(cache["argmax"], cache["seq_len"], grad_pooled)
    grad_conv = relu_backward(cache["conv"], grad_conv_act)
    grad_emb, gcw, gcb = conv1d_backward(cache["emb"], model.conv_w, grad_conv)
    grads["conv_w"] += gcw
    grads["conv_b"] += gcb
    grads["embedding"] += embedding_backward(cache["ids"], grad_emb, hp.vocab_size)


def _one_hot(label: int) -> np.ndarray:
    return VULNERABLE if label else NOT_VULNERABLE


def loss_and_grads(
    model: ModelParams,
    batch: Sequence[EncodedSample],
    rng: np.random.Generator | None = None,
    head_class_weights: np.ndarray | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean over the batch of the summed five-head cross-entropy, plus grads.

    Dropout is active (training mode). head_class_weights, when given, is a
    (heads, 2) array scaling each head's loss by the true class's weight;
    the default treats heads and classes symmetrically.
    """
    if len(batch) == 0:
        raise DataError("cannot compute a loss over an empty batch")
    hp = model.hp
    if head_class_weights is not None:
        head_class_weights = np.asarray(head_class_weights, dtype=np.float64)
        if head_class_weights.shape != (hp.heads, hp.head_width):
            raise ConfigError(
                f"head_class_weights must have shape {(hp.heads, hp.head_width)}, "
                f"got {head_class_weights.shape}"
            )
    grads = {name: np.zeros_like(arr) for name, arr in model.named_arrays()}
    total = 0.0
    for sample in batch:
        probs, cache = _forward(model, sample.ids, Mode.TRAIN, rng)
        grad_logits = []
        for h in range(hp.heads):
            label = int(sample.labels[h])
            loss_h, gz = cross_entropy(probs[h], _one_hot(label))
            if head_class_weights is not None:
                weight = head_class_weights[h, label]
                loss_h *= weight
                gz = gz * weight
            total += loss_h
            grad_logits.append(gz)
        _backward(model, cache, grad_logits, grads)
    scale = 1.0 / len(batch)
    for name in grads:
        grads[name] *= scale
    return total * scale, grads


def evaluate_loss(model: ModelParams, batch: Sequence[EncodedSample]) -> float:
    """Mean summed-head cross-entropy with dropout disabled (no gradients)."""
    if len(batch) == 0:
        raise DataError("cannot compute a loss over an empty batch")
    total = 0.0
    for sample in batch:
        probs, _ = _forward(model, sample.ids, Mode.INFER)
        for h in range(model.hp.heads):
            loss_h, _ = cross_entropy(probs[h], _one_hot(int(sample.labels[h])))
            total += loss_h
    return total / len(batch)


def vulnerable_scores(model: ModelParams, ids: np.ndarray) -> np.ndarray:
    """Probability of the vulnerable slot for each head, shape (heads,)."""
    probs = forward(model, ids, Mode.INFER)
    return np.array([p[1] for p in probs])


def predict(model: ModelParams, source: str | bytes, vocab: Vocabulary) -> ScanResult:
    """Scan raw source text: lex, encode, run the network in inference mode."""
    tokens = lex(source)
    ids = encode(tokens, vocab, model.hp.max_len)
    scores = vulnerable_scores(model, ids)
    return ScanResult(
        probabilities={name: float(s) for name, s in zip(HEAD_NAMES, scores)},
        token_count=min(len(tokens), model.hp.max_len),
    )
