"""Cross-validation report structure and failure handling."""

import numpy as np
import pytest

from flowgap.evaluate import (
    LEVEL1,
    LEVEL2,
    REFERENCE_METRICS,
    cross_validate,
    score_rows,
    task_rows,
    task_targets,
    train_task,
)
from flowgap.gcn import TrainConfig
from flowgap.synthetic import generate_synthetic

FAST = TrainConfig(hidden=8, epochs=25)


@pytest.fixture(scope="module")
def rows():
    return generate_synthetic(60, seed=21)


class TestTaskSelection:
    def test_level1_uses_everything(self, rows):
        assert len(task_rows(rows, LEVEL1)) == 60
        y = task_targets(rows, LEVEL1)
        assert y.shape == (60, 1)

    def test_level2_uses_positives_only(self, rows):
        selected = task_rows(rows, LEVEL2)
        assert all(r.positive for r in selected)
        assert task_targets(selected, LEVEL2).shape == (len(selected), 8)

    def test_unknown_task_rejected(self, rows):
        with pytest.raises(ValueError):
            task_rows(rows, "level3")


class TestCrossValidate:
    def test_report_structure(self, rows):
        report = cross_validate(rows, LEVEL1, k=3, seed=1, config=FAST)
        data = report.as_dict()
        assert data["task"] == LEVEL1
        assert data["n_folds"] == 3 and len(data["folds"]) == 3
        assert data["reference"] == REFERENCE_METRICS[LEVEL1]
        assert set(data["mean"]) >= {"accuracy", "auc", "precision", "recall", "f1"}
        assert data["failed_folds"] == []

    def test_level2_report(self, rows):
        report = cross_validate(rows, LEVEL2, k=3, seed=1, config=FAST)
        data = report.as_dict()
        assert set(data["mean"]) >= {"auc_macro", "f1_macro", "f1_micro", "hamming"}
        assert data["reference"] == REFERENCE_METRICS[LEVEL2]

    def test_deterministic(self, rows):
        a = cross_validate(rows, LEVEL1, k=3, seed=5, config=FAST).as_dict()
        b = cross_validate(rows, LEVEL1, k=3, seed=5, config=FAST).as_dict()
        assert a == b

    def test_diverged_fold_is_reported_not_fatal(self, rows):
        bad = TrainConfig(hidden=8, epochs=10, loss_ceiling=1e-12)
        with pytest.warns(UserWarning, match="diverged"):
            report = cross_validate(rows, LEVEL1, k=3, seed=0, config=bad)
        assert report.failed_folds == [0, 1, 2]
        assert report.fold_metrics == [None, None, None]
        assert report.mean_metrics == {}

    def test_group_by_repo(self):
        rows = generate_synthetic(40, seed=2)
        relabeled = []
        for i, r in enumerate(rows):
            relabeled.append(
                type(r)(
                    repo=f"repo{i % 4}",
                    commit=r.commit,
                    file_path=r.file_path,
                    method=r.method,
                    before_source=r.before_source,
                    cfg=r.cfg,
                    features=r.features,
                    candidate_edge=r.candidate_edge,
                    positive=r.positive,
                    labels=r.labels,
                )
            )
        report = cross_validate(
            relabeled, LEVEL1, k=2, seed=0, config=FAST, group_by_repo=True
        )
        assert len(report.fold_metrics) == 2


class TestTrainTask:
    def test_model_scores_have_task_shape(self, rows):
        model, _ = train_task(rows, LEVEL1, FAST)
        scores = score_rows(model, rows[:5])
        assert scores.shape == (5, 1)
        model2, _ = train_task(rows, LEVEL2, FAST)
        scores2 = score_rows(model2, task_rows(rows, LEVEL2)[:4])
        assert scores2.shape == (4, 8)
        assert np.all((scores2 > 0) & (scores2 < 1))
