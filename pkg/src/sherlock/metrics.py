"""Per-head evaluation: confusion counts, accuracy/precision/recall/F1,
rank-based ROC-AUC, and text/JSONL report emission."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, UndefinedAUCError
from .model import HEAD_NAMES

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total


def confusion(
    scores: Sequence[float],
    labels: Sequence[int],
    threshold: float = DEFAULT_THRESHOLD,
) -> ConfusionCounts:
    """Threshold scores (>= rule at the boundary) and tally against labels."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise DataError(f"scores ({scores.shape}) and labels ({labels.shape}) differ in length")
    if scores.size == 0:
        raise DataError("cannot build a confusion matrix from no samples")
    predicted = scores >= threshold
    actual = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )


def prf1(counts: ConfusionCounts) -> tuple[float, float, float]:
    """Precision, recall, F1 with the zero-denominator-means-zero convention."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values all receive the mean of their rank run."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j < values.size and sorted_vals[j] == sorted_vals[i]:
            j += 1
        ranks[order[i:j]] = (i + 1 + j) / 2.0
        i = j
    return ranks


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """ROC-AUC via the rank-sum (Mann-Whitney) formulation.

    AUC = (sum of positive ranks - n_pos*(n_pos+1)/2) / (n_pos * n_neg),
    with ties given average ranks; equal to the trapezoidal ROC area.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise DataError(f"scores ({scores.shape}) and labels ({labels.shape}) differ in length")
    positives = labels == 1
    n_pos = int(positives.sum())
    n_neg = int(scores.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError(
            f"AUC needs both classes, got {n_pos} positives and {n_neg} negatives"
        )
    ranks = _average_ranks(scores)
    return float((ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class HeadMetrics:
    name: str
    counts: ConfusionCounts
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float | None  # None when the slice held a single class


@dataclass(frozen=True)
class MetricsReport:
    heads: list[HeadMetrics]


def evaluate_heads(
    scores_per_head: Sequence[Sequence[float]],
    labels_per_head: Sequence[Sequence[int]],
    threshold: float = DEFAULT_THRESHOLD,
    names: Sequence[str] = HEAD_NAMES,
) -> MetricsReport:
    """Score every head independently; single-class AUC is reported as absent."""
    heads = []
    for name, scores, labels in zip(names, scores_per_head, labels_per_head):
        counts = confusion(scores, labels, threshold)
        precision, recall, f1 = prf1(counts)
        try:
            auc = roc_auc(scores, labels)
        except UndefinedAUCError:
            auc = None
        heads.append(HeadMetrics(name, counts, counts.accuracy, precision, recall, f1, auc))
    return MetricsReport(heads=heads)


def _cell(value: float | None) -> str:
    return "-" if value is None else f"{value:.2f}"


def format_report(report: MetricsReport) -> str:
    """Fixed-column per-CWE table, values rounded to two decimals."""
    header = f"{'Metric (CWE)':<14}{'Accuracy':>10}{'Precision':>11}{'Recall':>8}{'F1 Score':>10}{'AUC':>7}"
    lines = [header]
    for head in report.heads:
        lines.append(
            f"{head.name:<14}{_cell(head.accuracy):>10}{_cell(head.precision):>11}"
            f"{_cell(head.recall):>8}{_cell(head.f1):>10}{_cell(head.auc):>7}"
        )
    return "\n".join(lines)


def format_benchmark(rows: Sequence[tuple[str, float, float, float]]) -> str:
    """Two-row (or more) model comparison table: (label, precision, recall, f1)."""
    width = max(len(label) for label, *_ in rows)
    width = max(width, len("Model")) + 2
    lines = [f"{'Model':<{width}}{'Precision':>10}{'Recall':>8}{'F1 Score':>10}"]
    for label, precision, recall, f1 in rows:
        lines.append(f"{label:<{width}}{precision:>10.2f}{recall:>8.2f}{f1:>10.2f}")
    return "\n".join(lines)


def export_jsonl(report: MetricsReport, path: str | Path) -> None:
    """One head per line; full precision, fields named exactly as reported."""
    with open(path, "w", encoding="utf-8") as fh:
        for head in report.heads:
            fh.write(json.dumps({
                "cwe": head.name,
                "accuracy": head.accuracy,
                "precision": head.precision,
                "recall": head.recall,
                "f1": head.f1,
                "auc": head.auc,
            }) + "\n")
