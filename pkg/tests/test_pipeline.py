"""End-to-end checks for record labeling and multi-repo mining."""

import pytest

from flowgap.fixtures import build_history
from flowgap.mining import MinerConfig, Polarity, scan_repository
from flowgap.pipeline import BuildAudit, build_rows, mine_repositories


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    path = tmp_path_factory.mktemp("pipeline") / "repo"
    history = build_history(path)
    records, stats = scan_repository(path, MinerConfig(), repo_name="planted")
    return history, records, stats


def test_audit_reconciles(planted):
    _, records, _ = planted
    rows, audit = build_rows(records)
    audit.check()
    assert audit.records_in == len(records)
    assert audit.examples_out == len(rows)
    assert audit.positives == sum(1 for r in rows if r.positive)
    assert audit.negatives == sum(1 for r in rows if not r.positive)


def test_audit_counts_drops_by_reason(planted):
    _, records, _ = planted
    _, audit = build_rows(records)
    assert audit.accepted_records + sum(audit.dropped.values()) == audit.records_in
    # planted histories are clean insertions: every record labels successfully
    assert audit.dropped == {}


def test_audit_check_rejects_inconsistent_totals():
    audit = BuildAudit(records_in=5, accepted_records=3, dropped={"no_label": 1})
    audit.examples_out = 3
    audit.positives = 2
    audit.negatives = 1
    with pytest.raises(AssertionError):
        audit.check()


def test_rows_carry_repo_and_commit(planted):
    history, records, _ = planted
    rows, _ = build_rows(records)
    commits = {r.commit for r in records}
    assert all(row.repo == "planted" for row in rows)
    assert {row.commit for row in rows} <= commits


def test_positive_rows_match_positive_records(planted):
    _, records, _ = planted
    rows, _ = build_rows(records)
    n_positive_records = sum(1 for r in records if r.polarity is Polarity.PATH_ADDING)
    # guard blocks after a join can fan out to several in-edges, never collapse
    assert sum(1 for r in rows if r.positive) >= n_positive_records


def test_mine_repositories_merges_and_balances(planted, tmp_path):
    other = tmp_path / "other"
    build_history(other, n_branch_adding=6, n_other=4, seed=11, with_noise_commits=False)
    history, _, _ = planted

    records, stats = mine_repositories(
        [("planted", history.path), ("other", other)],
        config=MinerConfig(),
        seed=0,
        balance=True,
        negative_ratio=1.0,
    )
    assert set(stats) == {"planted", "other"}
    repos_seen = {r.repo for r in records}
    assert repos_seen == {"planted", "other"}
    positives = sum(1 for r in records if r.polarity is Polarity.PATH_ADDING)
    negatives = len(records) - positives
    assert negatives <= positives


def test_mine_repositories_deterministic(planted, tmp_path):
    history, _, _ = planted
    a, _ = mine_repositories([("planted", history.path)], MinerConfig(), seed=5)
    b, _ = mine_repositories([("planted", history.path)], MinerConfig(), seed=5)
    assert a == b
