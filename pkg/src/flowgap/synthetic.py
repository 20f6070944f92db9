"""Synthetic datasets with rules planted in the features.

Methods are generated from statement templates so that ground truth is a
known function of the feature matrix: an example is a level-1 positive
exactly when some node assigns a parameter and the graph has no predicate;
its level-2 label set is exactly the statement-kind columns in which an
attribute is used. A rule-reading oracle therefore scores perfectly, which
pins the ceiling any learned model is measured against.
"""

from __future__ import annotations

import numpy as np

from .cfg import LABEL_CLASSES, StatementKind, build_cfg, parse_method
from .dataset import DatasetRow
from .features import FEATURE_COLUMNS, annotate_usage

_PARAM_ASSIGN_COL = FEATURE_COLUMNS.index("param_usage:Assign")
_PREDICATE_COL = FEATURE_COLUMNS.index("node_kind:predicate")
_ATTR_COLS = {
    kind: FEATURE_COLUMNS.index(f"attr_usage:{kind.value}") for kind in LABEL_CLASSES
}

# statements whose attribute use activates a specific label class
_ATTR_TEMPLATES: dict[StatementKind, str] = {
    StatementKind.RETURN: "return self.size",
    StatementKind.ASSIGN: "kept_{i} = self.size",
    StatementKind.AUG_ASSIGN: "self.total += {c}",
    StatementKind.RAISE: "raise self.error",
    StatementKind.CALL: "self.emit(self.size)",
    StatementKind.SUBSCRIPT: "picked_{i} = self.items[{c}]",
    StatementKind.BIN_OP: "width_{i} = self.size * {c}",
}

_FILLER = (
    "pad_{i} = {c}",
    "pad_{i} = b",
    "self.emit(b)",
)

_PARAM_ASSIGN = "copied_{i} = a"
_GUARD = "if b > {c}:"


def level1_truth(row: DatasetRow) -> bool:
    """Planted rule: a parameter assigned somewhere, and no branching."""
    feats = row.features
    return bool(
        feats[:, _PARAM_ASSIGN_COL].sum() > 0 and feats[:, _PREDICATE_COL].sum() == 0
    )


def level2_truth(row: DatasetRow) -> frozenset[StatementKind]:
    """Planted rule: label class k is active iff attr-usage column k is."""
    feats = row.features
    return frozenset(
        kind for kind, col in _ATTR_COLS.items() if feats[:, col].sum() > 0
    )


def _render_method(lines: list[str]) -> str:
    body = "\n".join("    " + line for line in lines)
    return f"def synthesized(self, a, b):\n{body}\n"


def _make_source(rng: np.random.Generator, positive: bool, i: int) -> str:
    def fill(template: str) -> str:
        return template.format(i=i, c=int(rng.integers(1, 9)))

    n_attr = int(rng.integers(1, 4))
    kinds = rng.choice(len(_ATTR_TEMPLATES), size=n_attr, replace=False)
    attr_lines = [fill(list(_ATTR_TEMPLATES.values())[int(k)]) for k in sorted(kinds)]
    # a raise or return ends the flow; keep such statements last
    attr_lines.sort(key=lambda s: s.startswith(("return", "raise")))

    if positive:
        lines = [fill(_FILLER[int(rng.integers(len(_FILLER)))])]
        lines.append(fill(_PARAM_ASSIGN))
        lines.extend(attr_lines)
    elif rng.random() < 0.5:
        # violate the no-branching conjunct: branch first, so a terminating
        # attribute statement cannot make the guard unreachable
        lines = [fill(_FILLER[int(rng.integers(len(_FILLER)))])]
        lines.append(fill(_GUARD))
        lines.append("    " + fill("pad_g{i} = {c}"))
        lines.append(fill(_PARAM_ASSIGN))
        lines.extend(attr_lines)
    else:
        # violate the parameter-assignment conjunct; the filler must not
        # assign a parameter either
        lines = [fill(_FILLER[0] if rng.random() < 0.5 else _FILLER[2])]
        lines.extend(attr_lines)
    return _render_method(lines)


def generate_synthetic(n: int = 500, seed: int = 0) -> list[DatasetRow]:
    """Build n rows through the real graph/feature pipeline.

    Positives and negatives alternate, keeping prevalence at one half. Every
    row's stored flags are re-derived from the planted rules, never assumed
    from the template choice.
    """
    rng = np.random.default_rng(seed)
    rows: list[DatasetRow] = []
    for i in range(n):
        want_positive = i % 2 == 0
        source = _make_source(rng, want_positive, i)
        tree = parse_method(source)
        cfg = build_cfg(tree)
        features = annotate_usage(tree, cfg)
        edge = cfg.edges[int(rng.integers(len(cfg.edges)))]
        row = DatasetRow(
            repo="synthetic",
            commit=f"synthetic-{i:05d}",
            file_path="synthetic.py",
            method=f"synthesized_{i}",
            before_source=source,
            cfg=cfg,
            features=features,
            candidate_edge=(edge.src, edge.dst),
            positive=False,
            labels=frozenset(),
        )
        positive = level1_truth(row)
        if positive != want_positive:
            raise AssertionError(f"template {i} violates the planted rule")
        rows.append(
            DatasetRow(
                repo=row.repo,
                commit=row.commit,
                file_path=row.file_path,
                method=row.method,
                before_source=row.before_source,
                cfg=row.cfg,
                features=row.features,
                candidate_edge=row.candidate_edge,
                positive=positive,
                labels=level2_truth(row) if positive else frozenset(),
            )
        )
    return rows


def oracle_scores(rows: list[DatasetRow], task: str) -> np.ndarray:
    """Perfect predictions obtained by reading the planted rules."""
    if task == "level1":
        return np.array([[1.0 if level1_truth(r) else 0.0] for r in rows])
    out = np.zeros((len(rows), len(LABEL_CLASSES)))
    for i, row in enumerate(rows):
        truth = level2_truth(row)
        for j, kind in enumerate(LABEL_CLASSES):
            out[i, j] = 1.0 if kind in truth else 0.0
    return out
