"""Dataset splitting (holdout and k-fold), the epoch/mini-batch training
loop, per-epoch validation logging, and history export."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import CorpusRecord
from .errors import ConfigError, DataError
from .metrics import HeadMetrics, MetricsReport, evaluate_heads
from .model import (
    Hyperparams,
    ModelParams,
    EncodedSample,
    evaluate_loss,
    init_model,
    loss_and_grads,
    vulnerable_scores,
)
from .optimizer import AdamState, adam_step
from .tokenizer import Vocabulary, encode, lex

log = logging.getLogger(__name__)

HOLDOUT = "holdout"
KFOLD = "kfold"


@dataclass
class SplitSpec:
    mode: str = HOLDOUT
    seed: int = 0
    train_frac: float = 0.8
    val_frac: float = 0.1
    test_frac: float = 0.1
    k: int = 5

    def validate(self) -> None:
        if self.mode not in (HOLDOUT, KFOLD):
            raise ConfigError(f"unknown split mode {self.mode!r}")
        if self.mode == HOLDOUT:
            total = self.train_frac + self.val_frac + self.test_frac
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(f"holdout fractions must sum to 1, got {total}")
        elif self.k < 2:
            raise ConfigError(f"k-fold needs k >= 2, got {self.k}")


@dataclass
class Partitions:
    """Index arrays into the original dataset; exactly one of the two layouts."""

    train: np.ndarray | None = None
    val: np.ndarray | None = None
    test: np.ndarray | None = None
    folds: list[np.ndarray] | None = None


def _exact_sizes(n: int, fractions: Sequence[float]) -> list[int]:
    """Largest-remainder allocation so the sizes sum to n exactly."""
    raw = [f * n for f in fractions]
    sizes = [math.floor(r) for r in raw]
    remainders = [r - s for r, s in zip(raw, sizes)]
    leftover = n - sum(sizes)
    for idx in sorted(range(len(sizes)), key=lambda i: (-remainders[i], i))[:leftover]:
        sizes[idx] += 1
    return sizes


def _stratified_assign(
    samples: Sequence, targets: list[int], rng: np.random.Generator
) -> list[list[int]]:
    """Spread each label-combination group across partitions in proportion
    to their capacities, shuffling within groups first."""
    groups: dict[tuple, list[int]] = {}
    for idx, sample in enumerate(samples):
        groups.setdefault(tuple(int(v) for v in sample.labels), []).append(idx)
    assigned: list[list[int]] = [[] for _ in targets]
    remaining = list(targets)
    for key in sorted(groups):
        indices = np.array(groups[key])
        rng.shuffle(indices)
        for idx in indices:
            ratios = [rem / tgt if tgt else -1.0 for rem, tgt in zip(remaining, targets)]
            part = int(np.argmax(ratios))
            assigned[part].append(int(idx))
            remaining[part] -= 1
    return assigned


def split(samples: Sequence, spec: SplitSpec) -> Partitions:
    """Deterministic, label-stratified partitioning.

    Samples need a 5-slot `labels` attribute. Partitions are disjoint and
    jointly exhaustive; each label combination is spread proportionally, so
    per-head positive rates stay close to the global rate when counts permit.
    """
    spec.validate()
    n = len(samples)
    parts = 3 if spec.mode == HOLDOUT else spec.k
    if n < parts:
        raise DataError(f"dataset of {n} samples cannot fill {parts} partitions")
    rng = np.random.default_rng(spec.seed)
    if spec.mode == HOLDOUT:
        targets = _exact_sizes(n, (spec.train_frac, spec.val_frac, spec.test_frac))
        train, val, test = _stratified_assign(samples, targets, rng)
        return Partitions(
            train=np.array(train, dtype=np.int64),
            val=np.array(val, dtype=np.int64),
            test=np.array(test, dtype=np.int64),
        )
    targets = _exact_sizes(n, [1.0 / spec.k] * spec.k)
    folds = _stratified_assign(samples, targets, rng)
    return Partitions(folds=[np.array(f, dtype=np.int64) for f in folds])


@dataclass
class TrainConfig:
    hp: Hyperparams
    epochs: int = 10
    batch_size: int = 128
    seed: int = 0
    head_class_weights: np.ndarray | None = None

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        self.hp.validate()


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_metrics: MetricsReport

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "heads": [
                {"cwe": h.name, "accuracy": h.accuracy, "precision": h.precision,
                 "recall": h.recall, "f1": h.f1, "auc": h.auc}
                for h in self.val_metrics.heads
            ],
        }


@dataclass
class TrainHistory:
    """Per-epoch records; k-fold runs carry one list per fold plus the
    across-fold mean of each head metric at the selected epochs."""

    folds: list[list[EpochRecord]] = field(default_factory=list)
    mean_val_metrics: list[dict] | None = None

    @property
    def epochs(self) -> list[EpochRecord]:
        return self.folds[0]

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for fold_no, records in enumerate(self.folds):
                for record in records:
                    row = {"fold": fold_no, **record.to_dict()}
                    fh.write(json.dumps(row) + "\n")


def encode_corpus(
    records: Sequence[CorpusRecord], vocab: Vocabulary, max_len: int
) -> list[EncodedSample]:
    """Lex and encode every record against a fixed vocabulary."""
    samples = []
    for record in records:
        ids = encode(lex(record.code), vocab, max_len)
        samples.append(EncodedSample(ids=ids, labels=np.array(record.labels, dtype=np.int64)))
    return samples


def _head_scores(model: ModelParams, samples: Sequence[EncodedSample]) -> tuple[np.ndarray, np.ndarray]:
    scores = np.empty((model.hp.heads, len(samples)))
    labels = np.empty((model.hp.heads, len(samples)), dtype=np.int64)
    for j, sample in enumerate(samples):
        scores[:, j] = vulnerable_scores(model, sample.ids)
        labels[:, j] = sample.labels
    return scores, labels


def evaluate_model(model: ModelParams, samples: Sequence[EncodedSample]) -> MetricsReport:
    """Full per-head metrics of a model over already-encoded samples."""
    scores, labels = _head_scores(model, samples)
    return evaluate_heads(scores, labels)


def _train_single(
    train_set: list[EncodedSample],
    val_set: list[EncodedSample],
    config: TrainConfig,
    seed_seq: np.random.SeedSequence,
) -> tuple[ModelParams, list[EpochRecord]]:
    init_seq, loop_seq = seed_seq.spawn(2)
    model = init_model(config.hp, np.random.default_rng(init_seq))
    state = AdamState(model.as_dict())
    rng = np.random.default_rng(loop_seq)
    history: list[EpochRecord] = []
    best: ModelParams | None = None
    best_loss = math.inf
    order = np.arange(len(train_set))
    for epoch in range(1, config.epochs + 1):
        rng.shuffle(order)
        loss_sum = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start : start + config.batch_size]]
            loss, grads = loss_and_grads(model, batch, rng, config.head_class_weights)
            adam_step(model.as_dict(), grads, state, config.hp.learning_rate)
            loss_sum += loss * len(batch)
        train_loss = loss_sum / len(order)
        val_loss = evaluate_loss(model, val_set)
        record = EpochRecord(epoch, train_loss, val_loss, evaluate_model(model, val_set))
        history.append(record)
        log.info("epoch %d: train loss %.4f, val loss %.4f", epoch, train_loss, val_loss)
        if val_loss < best_loss:
            best_loss = val_loss
            best = model.copy()
    assert best is not None
    return best, history


def _mean_metrics(reports: list[MetricsReport]) -> list[dict]:
    means = []
    for h in range(len(reports[0].heads)):
        rows = [report.heads[h] for report in reports]
        aucs = [row.auc for row in rows if row.auc is not None]
        means.append({
            "cwe": rows[0].name,
            "accuracy": float(np.mean([row.accuracy for row in rows])),
            "precision": float(np.mean([row.precision for row in rows])),
            "recall": float(np.mean([row.recall for row in rows])),
            "f1": float(np.mean([row.f1 for row in rows])),
            "auc": float(np.mean(aucs)) if aucs else None,
        })
    return means


def train(
    dataset: Sequence[EncodedSample],
    config: TrainConfig,
    spec: SplitSpec,
) -> tuple[ModelParams, TrainHistory]:
    """Run the configured training regime over an encoded dataset.

    Holdout mode returns the parameters of the epoch with the lowest
    validation loss. K-fold mode trains one model per fold, records every
    fold's history, and returns the last fold's model together with the
    across-fold mean of the selected-epoch validation metrics.
    """
    config.validate()
    spec.validate()
    parts = split(dataset, spec)
    if spec.mode == HOLDOUT:
        train_set = [dataset[i] for i in parts.train]
        val_set = [dataset[i] for i in parts.val]
        model, records = _train_single(
            train_set, val_set, config, np.random.SeedSequence(config.seed)
        )
        return model, TrainHistory(folds=[records])

    histories: list[list[EpochRecord]] = []
    fold_reports: list[MetricsReport] = []
    model = None
    for fold_no, fold in enumerate(parts.folds):
        fold_mask = np.zeros(len(dataset), dtype=bool)
        fold_mask[fold] = True
        train_set = [dataset[i] for i in np.nonzero(~fold_mask)[0]]
        val_set = [dataset[i] for i in fold]
        model, records = _train_single(
            train_set, val_set, config,
            np.random.SeedSequence((config.seed, fold_no)),
        )
        histories.append(records)
        best_epoch = min(records, key=lambda r: r.val_loss)
        fold_reports.append(best_epoch.val_metrics)
        log.info("fold %d/%d finished, best val loss %.4f",
                 fold_no + 1, spec.k, best_epoch.val_loss)
    assert model is not None
    return model, TrainHistory(folds=histories, mean_val_metrics=_mean_metrics(fold_reports))
