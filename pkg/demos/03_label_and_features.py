"""
From a mined record to a labeled, feature-annotated example
===========================================================

A positive record becomes a training example in three steps:

1. prune the added path out of the after-commit graph, which must
   reconstruct the before-commit graph exactly (otherwise the record is
   dropped with an audit reason);
2. the edge where the guard was inserted becomes the positive candidate
   edge, and the statement kinds inside the removed block become the
   level-2 labels;
3. every node gets a feature row describing how the method's parameters
   and receiver attributes are used in it.
"""

import numpy as np

from flowgap import (
    FEATURE_COLUMNS,
    annotate_usage,
    build_cfg,
    extract_inputs,
    parse_method,
)
from flowgap.labeling import label_record
from flowgap.mining import MethodChangeRecord, Polarity, added_line_spans

BEFORE = '''
def append_point(self, point):
    index = len(self.points)
    self.points.append(point)
    self.log(index)
    return index
'''

AFTER = '''
def append_point(self, point):
    index = len(self.points)
    if point is None:
        self.log(index)
        raise ValueError(index)
    self.points.append(point)
    self.log(index)
    return index
'''

record = MethodChangeRecord(
    repo="demo", commit="0" * 40, file_path="geom.py", method="Shape.append_point",
    before_source=BEFORE, after_source=AFTER,
    added_spans=added_line_spans(BEFORE, AFTER),
    polarity=Polarity.PATH_ADDING,
)

examples, drop = label_record(record)
assert drop is None
example = examples[0]
print(f"candidate edge: {example.candidate_edge} (positive={example.positive})")
print(f"missing-branch statement kinds: {sorted(k.value for k in example.labels)}")

# The inputs are the declared parameters plus the receiver attributes the
# method touches; 'self.points.append(...)' reads the attribute 'points'.
tree = parse_method(BEFORE)
inputs = extract_inputs(tree)
print(f"\nparameters: {inputs.parameters}  attributes: {inputs.attributes}")

# One row per node, one column per (input-kind x usage) plus node/statement
# one-hots. Nonzero columns for the node holding 'index = len(self.points)':
cfg = build_cfg(tree)
features = annotate_usage(tree, cfg)
print(f"feature matrix: {features.shape}")
row = features[1]
for col in np.nonzero(row)[0]:
    print(f"  {FEATURE_COLUMNS[col]:<28} {row[col]:.0f}")
