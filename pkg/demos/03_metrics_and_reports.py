"""Tour of the evaluation toolkit: confusion counts, PRF1, rank-based AUC,
and the two report tables.

Run from the repository root:  python3 demos/03_metrics_and_reports.py
"""

import numpy as np

from sherlock import confusion, evaluate_heads, format_benchmark, format_report, prf1, roc_auc

rng = np.random.default_rng(0)

# A model that is informative but imperfect: positives score higher on average.
labels = rng.integers(0, 2, size=400)
scores = np.clip(0.35 * labels + rng.normal(0.3, 0.2, size=400), 0, 1)

counts = confusion(scores, labels)  # threshold 0.5, >= at the boundary
precision, recall, f1 = prf1(counts)
print(f"confusion: tp={counts.tp} fp={counts.fp} tn={counts.tn} fn={counts.fn}")
print(f"accuracy {counts.accuracy:.3f}  precision {precision:.3f}  "
      f"recall {recall:.3f}  f1 {f1:.3f}")

# AUC comes from the rank-sum formulation (ties get average ranks), so it is
# invariant under any strictly monotone rescaling of the scores.
print(f"auc {roc_auc(scores, labels):.3f}  "
      f"(same after exp: {roc_auc(np.exp(scores), labels):.3f})")

# Per-head report in the fixed five-CWE layout. Head 3 gets a single-class
# slice: its AUC is undefined and rendered as '-', never a made-up number.
scores_per_head = [scores, 1 - scores, rng.random(400), rng.random(400), scores]
labels_per_head = [labels, labels, rng.integers(0, 2, 400), np.zeros(400, int), labels]
report = evaluate_heads(scores_per_head, labels_per_head)
print()
print(format_report(report))

# Side-by-side comparison table against a fixed baseline row.
print()
print(format_benchmark([
    ("Code2vec + MLP", 0.06, 0.87, 0.12),
    ("Sherlock (ours)", report.heads[0].precision, report.heads[0].recall,
     report.heads[0].f1),
]))
