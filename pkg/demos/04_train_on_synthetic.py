"""
Train and cross-validate the two classifiers on planted-rule data
=================================================================

The synthetic generator plants two known rules into real method sources:
an edge is an extension point iff a parameter is used in an assignment and
the method has no branches yet, and the missing branch's statement kinds
are encoded by which receiver attributes appear. A model that works must
recover both rules almost perfectly; that is the learnability gate.
"""

from flowgap import TrainConfig, cross_validate, generate_synthetic

rows = generate_synthetic(n=200, seed=0)
positives = sum(1 for r in rows if r.positive)
print(f"{len(rows)} synthetic examples ({positives} positive)")

config = TrainConfig(hidden=32, epochs=200)

# Level 1: is this specific CFG edge a place where a branch was inserted?
report = cross_validate(rows, "level1", k=5, seed=0, config=config)
print("\nlevel1 (extension-point detection), 5-fold means:")
for name, value in report.mean_metrics.items():
    ref = report.as_dict()["reference"].get(name)
    ref_txt = f"  (large-corpus reference {ref:.3f})" if ref else ""
    print(f"  {name:<10} {value:.3f}{ref_txt}")

# Level 2: which statement kinds does the missing branch contain?
report2 = cross_validate(rows, "level2", k=5, seed=0, config=config)
print("\nlevel2 (missing-branch statement kinds), 5-fold means:")
for name in ("auc_macro", "f1_macro", "f1_micro", "hamming"):
    value = report2.mean_metrics[name]
    ref = report2.as_dict()["reference"].get(name)
    print(f"  {name:<10} {value:.3f}  (large-corpus reference {ref:.3f})")
