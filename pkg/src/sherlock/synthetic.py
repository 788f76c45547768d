"""Synthetic C corpus with plantable per-CWE token patterns.

Each head's label is decided by one telltale statement pattern inserted into
an otherwise benign generated function, which makes the corpus separable by
token n-grams. One head (CWE-469) is kept almost without positives on
purpose, so pipelines can exercise the degenerate extreme-imbalance case.
"""

from __future__ import annotations

import numpy as np

from .dataset import CorpusRecord

# Fraction of positive samples per head, in head order. CWE-469 is the
# deliberately starved head.
DEFAULT_POSITIVE_RATES = (0.30, 0.30, 0.003, 0.30, 0.30)

_VARS = ["count", "total", "index", "offset", "limit", "step", "width", "acc", "pos", "extent"]
_CALLS = ["update_state", "compute_sum", "refresh_view", "log_event", "advance_cursor"]
_FUNC_NAMES = ["process_block", "handle_request", "copy_payload", "parse_entry",
               "route_message", "collect_stats", "apply_patch", "merge_chunks"]

_BENIGN = [
    "{a} = {a} + {b};",
    "{a} = {b} * 2 + 1;",
    "if ({a} > {b}) {{ {a} = {b}; }}",
    "for (int i = 0; i < {a}; i++) {{ {b} += i; }}",
    "while ({a} < {b}) {{ {a}++; }}",
    "{a} = {fn}({b}, {c});",
    "if ({a} == 0) {{ {b} = {c}; }}",
    "{a} -= {c};",
]

# One signature statement per head; the callee / identifier pair is the
# learnable marker.
_PATTERNS = [
    "memcpy({a}, {b}, {c});",                      # CWE-119
    "strcpy({a}, {b});",                           # CWE-120
    "{a} = end_ptr - start_ptr;",                  # CWE-469
    "{a} = malloc({b}); {a}[0] = {c};",            # CWE-476
    "system({a});",                                # CWE-other
]


def _statement(template: str, rng: np.random.Generator) -> str:
    a, b, c = rng.choice(_VARS, size=3, replace=False)
    return template.format(a=a, b=b, c=c, fn=rng.choice(_CALLS))


def toy_corpus(
    n: int = 2000,
    seed: int = 0,
    positive_rates: tuple[float, ...] = DEFAULT_POSITIVE_RATES,
) -> list[CorpusRecord]:
    """Generate n labelled functions with exactly round(rate*n) positives
    per head (sampled without replacement, so counts are deterministic)."""
    rng = np.random.default_rng(seed)
    labels = np.zeros((n, len(positive_rates)), dtype=np.int64)
    for head, rate in enumerate(positive_rates):
        positives = int(round(rate * n))
        labels[rng.choice(n, size=positives, replace=False), head] = 1

    records = []
    for i in range(n):
        name = rng.choice(_FUNC_NAMES)
        arg1, arg2 = rng.choice(_VARS, size=2, replace=False)
        body = [_statement(rng.choice(_BENIGN), rng)
                for _ in range(int(rng.integers(3, 8)))]
        for head in np.nonzero(labels[i])[0]:
            body.insert(int(rng.integers(0, len(body) + 1)),
                        _statement(_PATTERNS[head], rng))
        code = (
            f"int {name}(char *{arg1}, char *{arg2}, int limit) {{\n    "
            + "\n    ".join(body)
            + f"\n    return {rng.choice(_VARS)};\n}}\n"
        )
        records.append(CorpusRecord(code=code, labels=tuple(int(v) for v in labels[i])))
    return records
