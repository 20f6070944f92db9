"""CLI contract: subcommand wiring, artifact files, and exit codes."""

import json
import shutil
import subprocess
import sys

import pytest

from flowgap.cli import EXIT_DATA, EXIT_DIVERGED, EXIT_OK, EXIT_USAGE, main
from flowgap.fixtures import build_history
from flowgap.gcn import load_model

METHOD = """
def scale_all(self, factor):
    total = 0
    for p in self.points:
        total = total + p
    self.log(total)
    return total * factor
"""


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One artifact chain shared by the read-only tests below."""
    root = tmp_path_factory.mktemp("cli")
    build_history(root / "repo", n_branch_adding=12, n_other=6, seed=3,
                  with_noise_commits=False)
    (root / "config.json").write_text(
        json.dumps({"train": {"hidden": 8, "epochs": 25}})
    )
    (root / "method.py").write_text(METHOD)

    assert main(["mine", "--repo", f"demo={root / 'repo'}",
                 "--out", str(root / "records.jsonl")]) == EXIT_OK
    assert main(["build-dataset", "--records", str(root / "records.jsonl"),
                 "--out", str(root / "dataset.jsonl")]) == EXIT_OK
    assert main(["train", "--dataset", str(root / "dataset.jsonl"),
                 "--task", "level1", "--out", str(root / "edge.json"),
                 "--config", str(root / "config.json")]) == EXIT_OK
    return root


def test_mine_writes_records_and_stats(workspace, capsys, tmp_path):
    out = tmp_path / "records.jsonl"
    rc = main(["mine", "--repo", f"demo={workspace / 'repo'}", "--out", str(out)])
    captured = json.loads(capsys.readouterr().out)
    assert rc == EXIT_OK
    assert out.exists()
    assert captured["records"] == len(out.read_text().splitlines())
    assert captured["repos"]["demo"]["positives"] == 12


def test_mine_rejects_non_repository(tmp_path):
    (tmp_path / "plain").mkdir()
    rc = main(["mine", "--repo", str(tmp_path / "plain"),
               "--out", str(tmp_path / "r.jsonl")])
    assert rc == EXIT_DATA


def test_build_dataset_emits_audit_and_schema(workspace, capsys, tmp_path):
    out = tmp_path / "dataset.jsonl"
    rc = main(["build-dataset", "--records", str(workspace / "records.jsonl"),
               "--out", str(out)])
    audit = json.loads(capsys.readouterr().out)
    assert rc == EXIT_OK
    assert audit["records_in"] == audit["accepted_records"] + sum(audit["dropped"].values())
    assert (tmp_path / "feature_schema.json").exists()


def test_build_dataset_missing_records(tmp_path):
    rc = main(["build-dataset", "--records", str(tmp_path / "nope.jsonl"),
               "--out", str(tmp_path / "d.jsonl")])
    assert rc == EXIT_DATA


def test_train_saves_loadable_model(workspace):
    model = load_model(workspace / "edge.json")
    assert model.w1.shape[0] == 37


def test_train_reports_progress(workspace, capsys, tmp_path):
    rc = main(["train", "--dataset", str(workspace / "dataset.jsonl"),
               "--task", "level2", "--out", str(tmp_path / "kinds.json"),
               "--config", str(workspace / "config.json")])
    report = json.loads(capsys.readouterr().out)
    assert rc == EXIT_OK
    assert report["epochs"] == 25
    assert report["task"] == "level2"


def test_train_divergence_exit_code(workspace, tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"train": {"hidden": 8, "epochs": 50,
                                            "learning_rate": 1e8}}))
    rc = main(["train", "--dataset", str(workspace / "dataset.jsonl"),
               "--task", "level1", "--out", str(tmp_path / "m.json"),
               "--config", str(config)])
    capsys.readouterr()
    assert rc == EXIT_DIVERGED


def test_evaluate_writes_report(workspace, capsys, tmp_path):
    out = tmp_path / "report.json"
    rc = main(["evaluate", "--dataset", str(workspace / "dataset.jsonl"),
               "--task", "level1", "--out", str(out), "--folds", "3",
               "--config", str(workspace / "config.json")])
    summary = json.loads(capsys.readouterr().out)
    assert rc == EXIT_OK
    report = json.loads(out.read_text())
    assert report["task"] == "level1"
    assert report["reference"]["auc"] == 0.817
    assert summary["mean"] == report["mean"]


def test_evaluate_too_few_rows_is_data_error(workspace, tmp_path, capsys):
    dataset = tmp_path / "tiny.jsonl"
    first = (workspace / "dataset.jsonl").read_text().splitlines()[0]
    dataset.write_text(first + "\n")
    rc = main(["evaluate", "--dataset", str(dataset), "--task", "level1",
               "--out", str(tmp_path / "r.json"), "--folds", "5"])
    capsys.readouterr()
    assert rc == EXIT_DATA


def test_recommend_ranks_edges(workspace, capsys):
    rc = main(["recommend", "--model", str(workspace / "edge.json"),
               "--method-file", str(workspace / "method.py"), "--top-k", "2"])
    result = json.loads(capsys.readouterr().out)
    assert rc == EXIT_OK
    assert result["method"] == "scale_all"
    assert len(result["candidates"]) == 2
    scores = [c["score"] for c in result["candidates"]]
    assert scores == sorted(scores, reverse=True)


def test_recommend_rejects_unparseable_method(workspace, tmp_path, capsys):
    bad = tmp_path / "bad.py"
    bad.write_text("def broken(:\n    pass\n")
    rc = main(["recommend", "--model", str(workspace / "edge.json"),
               "--method-file", str(bad)])
    capsys.readouterr()
    assert rc == EXIT_DATA


def test_usage_error_exit_code(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["mine"]) == EXIT_USAGE  # missing --repo/--out
    assert main(["train", "--task", "bogus"]) == EXIT_USAGE
    capsys.readouterr()


def test_mine_rerun_is_byte_identical(workspace, tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    main(["mine", "--repo", f"demo={workspace / 'repo'}", "--out", str(a)])
    main(["mine", "--repo", f"demo={workspace / 'repo'}", "--out", str(b)])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_console_script_help():
    exe = shutil.which("flowgap")
    if exe is None:
        pytest.skip("console script not installed")
    done = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert done.returncode == 0
    assert "recommend" in done.stdout


def test_module_invocation_usage_error():
    done = subprocess.run([sys.executable, "-m", "flowgap.cli", "mine"],
                          capture_output=True, text=True)
    assert done.returncode == EXIT_USAGE
    assert "error" in done.stderr
