"""
Mine a git history for branch-adding method changes
===================================================

The miner walks every commit, diffs each modified Python file against its
parent, and keeps method bodies whose edit added an if-statement path
(positives) or changed the method some other way (negatives).

This demo plants a small synthetic history first, so it runs offline and
produces known counts.
"""

import tempfile
from pathlib import Path

from flowgap import MinerConfig, Polarity, scan_repository
from flowgap.fixtures import build_history

workdir = Path(tempfile.mkdtemp(prefix="flowgap-demo-"))
repo = workdir / "repo"

# 12 commits that wrap existing statements in a new guard, 6 that only
# tweak expressions, plus noise commits (comment edits, a merge, a bulk
# formatting sweep) the miner must ignore.
history = build_history(repo, n_branch_adding=12, n_other=6, seed=3)
print(f"planted history at {repo}")

records, stats = scan_repository(repo, MinerConfig(), repo_name="demo")
print(f"\nminer stats: {stats.as_dict()}")

positives = [r for r in records if r.polarity is Polarity.PATH_ADDING]
print(f"{len(records)} records, {len(positives)} positive")

# One record holds both method versions and the 1-based lines the commit
# added on the after side.
sample = positives[0]
print(f"\nsample: {sample.method} in {sample.file_path} @ {sample.commit[:8]}")
print(f"added line spans: {sample.added_spans}")
print("after-side method:")
for i, line in enumerate(sample.after_source.splitlines(), start=1):
    added = any(a <= i <= b for a, b in sample.added_spans)
    print(f"  {'+' if added else ' '} {line}")
