"""Line-delimited corpus format: loading, writing and imbalance statistics.

One JSON object per line with fields `code` (string) and `labels` (array of
five 0/1 integers, ordered CWE-119, CWE-120, CWE-469, CWE-476, CWE-other).
Loading is lenient by default: malformed lines are reported with their line
numbers while the valid remainder still loads.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import DataError
from .model import HEAD_NAMES

log = logging.getLogger(__name__)

LABEL_COUNT = 5
LOW_SUPPORT_RATE = 0.01


@dataclass(frozen=True)
class CorpusRecord:
    code: str
    labels: tuple[int, ...]


@dataclass(frozen=True)
class MalformedLine:
    line_no: int
    reason: str


@dataclass(frozen=True)
class LoadReport:
    records: list[CorpusRecord]
    errors: list[MalformedLine]


def _parse_line(line: str) -> CorpusRecord:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    code = obj.get("code")
    if not isinstance(code, str):
        raise ValueError("field 'code' missing or not a string")
    labels = obj.get("labels")
    if not isinstance(labels, list) or len(labels) != LABEL_COUNT:
        raise ValueError(f"field 'labels' must be an array of {LABEL_COUNT} integers")
    for value in labels:
        if isinstance(value, bool) or value not in (0, 1):
            raise ValueError(f"label values must be 0 or 1, got {value!r}")
    return CorpusRecord(code=code, labels=tuple(int(v) for v in labels))


def load_corpus(path: str | Path, strict: bool = False) -> LoadReport:
    """Parse a line-delimited corpus file.

    Lenient mode (default) collects malformed lines into the report; strict
    mode aborts on the first one.
    """
    records: list[CorpusRecord] = []
    errors: list[MalformedLine] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(_parse_line(line))
            except (ValueError, json.JSONDecodeError) as exc:
                if strict:
                    raise DataError(f"line {line_no}: {exc}") from exc
                errors.append(MalformedLine(line_no=line_no, reason=str(exc)))
    if errors:
        log.warning("corpus %s: %d malformed line(s) skipped", path, len(errors))
    return LoadReport(records=records, errors=errors)


def write_corpus(records: Sequence[CorpusRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps({"code": record.code, "labels": list(record.labels)}) + "\n")


@dataclass(frozen=True)
class HeadCount:
    name: str
    positives: int
    total: int

    @property
    def rate(self) -> float:
        return self.positives / self.total


@dataclass(frozen=True)
class ImbalanceStats:
    heads: list[HeadCount]
    low_support: list[str]  # heads with a positive rate under 1%


def imbalance_stats(records: Sequence[CorpusRecord]) -> ImbalanceStats:
    """Exact per-head positive counts; warns about heads with <1% positives."""
    if not records:
        raise DataError("cannot compute imbalance statistics for an empty corpus")
    total = len(records)
    heads = []
    for i, name in enumerate(HEAD_NAMES):
        positives = sum(record.labels[i] for record in records)
        heads.append(HeadCount(name=name, positives=positives, total=total))
    low = [head.name for head in heads if head.rate < LOW_SUPPORT_RATE]
    if low:
        log.warning("heads with under %.0f%% positive examples: %s",
                    LOW_SUPPORT_RATE * 100, ", ".join(low))
    return ImbalanceStats(heads=heads, low_support=low)
