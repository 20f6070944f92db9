"""End-to-end assembly: repositories -> records -> labeled dataset rows.

Every record is accounted for: it either yields at least one example or is
counted under exactly one drop reason, and the audit refuses to balance
otherwise. This is the layer the CLI calls into.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .dataset import DatasetRow, row_from_example
from .labeling import DropReason, label_record
from .mining import (
    MethodChangeRecord,
    MinerConfig,
    MiningStats,
    dedupe_and_balance,
    scan_repository,
)


@dataclass
class BuildAudit:
    """Reconciliation of a dataset build."""

    records_in: int = 0
    accepted_records: int = 0
    dropped: dict[str, int] = field(default_factory=dict)
    examples_out: int = 0
    positives: int = 0
    negatives: int = 0

    def check(self) -> None:
        if self.records_in != self.accepted_records + sum(self.dropped.values()):
            raise AssertionError(f"audit does not reconcile: {self.as_dict()}")
        if self.examples_out != self.positives + self.negatives:
            raise AssertionError(f"audit does not reconcile: {self.as_dict()}")

    def as_dict(self) -> dict:
        return {
            "records_in": self.records_in,
            "accepted_records": self.accepted_records,
            "dropped": dict(sorted(self.dropped.items())),
            "examples_out": self.examples_out,
            "positives": self.positives,
            "negatives": self.negatives,
        }


def build_rows(
    records: list[MethodChangeRecord],
) -> tuple[list[DatasetRow], BuildAudit]:
    """Label every record and materialize the survivors as dataset rows."""
    audit = BuildAudit(records_in=len(records))
    rows: list[DatasetRow] = []
    for record in records:
        examples, reason = label_record(record)
        if reason is not None:
            audit.dropped[reason.value] = audit.dropped.get(reason.value, 0) + 1
            continue
        audit.accepted_records += 1
        for example in examples:
            rows.append(row_from_example(example))
            audit.examples_out += 1
            if example.positive:
                audit.positives += 1
            else:
                audit.negatives += 1
    audit.check()
    return rows, audit


def mine_repositories(
    repos: list[tuple[str, Path]],
    config: MinerConfig = MinerConfig(),
    seed: int = 0,
    balance: bool = True,
    negative_ratio: float = 1.0,
) -> tuple[list[MethodChangeRecord], dict[str, MiningStats]]:
    """Scan several repositories and optionally balance the merged records."""
    all_records: list[MethodChangeRecord] = []
    stats: dict[str, MiningStats] = {}
    for name, path in repos:
        records, repo_stats = scan_repository(path, config, repo_name=name)
        all_records.extend(records)
        stats[name] = repo_stats
    if balance:
        all_records = dedupe_and_balance(all_records, seed=seed, negative_ratio=negative_ratio)
    return all_records, stats
