"""Classification metrics and cross-validation fold planning.

Metrics that are undefined on a given sample (AUC with one class present,
precision with no predicted positives) are reported as None rather than a
made-up number; F1 degrades to 0.0 when one of its parts is missing so that
averages over folds and classes stay well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, ties sharing the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def rank_auc(y_true: np.ndarray, scores: np.ndarray) -> float | None:
    """Probability a positive outranks a negative, ties counting half.

    Computed from average ranks (the Mann-Whitney statistic). None when only
    one class is present.
    """
    y = np.asarray(y_true, dtype=bool)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise ValueError("y_true and scores must be equal-length vectors")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(s)
    pos_rank_sum = float(ranks[y].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


@dataclass(frozen=True)
class BinaryMetrics:
    n: int
    accuracy: float
    auc: float | None
    precision: float | None
    recall: float | None
    f1: float

    def as_dict(self) -> dict:
        return dict(vars(self))


def f1_from(precision: float | None, recall: float | None) -> float:
    """Harmonic mean, 0.0 whenever a part is missing or both are zero."""
    if precision is None or recall is None or precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def binary_metrics(
    y_true: np.ndarray, scores: np.ndarray, threshold: float = 0.5
) -> BinaryMetrics:
    y = np.asarray(y_true, dtype=bool)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1 or len(y) == 0:
        raise ValueError("need equal-length non-empty vectors")
    pred = s >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    return BinaryMetrics(
        n=len(y),
        accuracy=float(np.mean(pred == y)),
        auc=rank_auc(y, s),
        precision=precision,
        recall=recall,
        f1=f1_from(precision, recall),
    )


@dataclass(frozen=True)
class MultilabelMetrics:
    n: int
    n_classes: int
    auc_macro: float | None
    f1_macro: float
    f1_micro: float
    hamming: float
    per_class_auc: tuple[float | None, ...]
    per_class_f1: tuple[float, ...]

    def as_dict(self) -> dict:
        d = dict(vars(self))
        d["per_class_auc"] = list(self.per_class_auc)
        d["per_class_f1"] = list(self.per_class_f1)
        return d


def multilabel_metrics(
    y_true: np.ndarray, scores: np.ndarray, threshold: float = 0.5
) -> MultilabelMetrics:
    """Per-class and aggregate metrics for 0/1 label matrices.

    auc_macro averages the classes where AUC exists; f1_macro averages every
    class, counting degenerate ones as 0; f1_micro pools all (example, class)
    cells; hamming is the flat mismatch rate.
    """
    y = np.asarray(y_true, dtype=bool)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 2 or y.size == 0:
        raise ValueError("need equal-shape non-empty matrices")
    per_auc = tuple(rank_auc(y[:, c], s[:, c]) for c in range(y.shape[1]))
    defined = [a for a in per_auc if a is not None]

    per_f1 = []
    for c in range(y.shape[1]):
        m = binary_metrics(y[:, c], s[:, c], threshold)
        per_f1.append(m.f1)

    flat = binary_metrics(y.ravel(), s.ravel(), threshold)
    pred = s >= threshold
    return MultilabelMetrics(
        n=y.shape[0],
        n_classes=y.shape[1],
        auc_macro=float(np.mean(defined)) if defined else None,
        f1_macro=float(np.mean(per_f1)),
        f1_micro=flat.f1,
        hamming=float(np.mean(pred != y)),
        per_class_auc=per_auc,
        per_class_f1=tuple(per_f1),
    )


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[int, ...], ...]

    def validate(self, n: int) -> None:
        flat = sorted(i for fold in self.folds for i in fold)
        if flat != list(range(n)):
            raise ValueError("folds must partition range(n)")
        if any(not fold for fold in self.folds):
            raise ValueError("folds must be non-empty")

    def split(self, fold_idx: int, n: int) -> tuple[list[int], list[int]]:
        """(train_indices, test_indices) for one held-out fold."""
        test = set(self.folds[fold_idx])
        train = [i for i in range(n) if i not in test]
        return train, sorted(test)


def make_folds(
    n: int,
    k: int = 5,
    seed: int = 0,
    groups: list[str] | None = None,
) -> FoldPlan:
    """Shuffled round-robin assignment of n items into k folds.

    With groups given, whole groups are assigned to folds instead, so items
    sharing a group (e.g. the same source repository) never straddle the
    train/test boundary.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    if groups is None:
        if n < k:
            raise ValueError("need at least one item per fold")
        order = rng.permutation(n)
        for slot, idx in enumerate(order):
            folds[slot % k].append(int(idx))
    else:
        if len(groups) != n:
            raise ValueError("groups must align with items")
        unique = sorted(set(groups))
        if len(unique) < k:
            raise ValueError("need at least one group per fold")
        by_group: dict[str, list[int]] = {g: [] for g in unique}
        for i, g in enumerate(groups):
            by_group[g].append(i)
        for slot, g_idx in enumerate(rng.permutation(len(unique))):
            folds[slot % k].extend(by_group[unique[int(g_idx)]])
    plan = FoldPlan(tuple(tuple(sorted(f)) for f in folds))
    plan.validate(n)
    return plan
