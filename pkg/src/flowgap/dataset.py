"""On-disk formats: records, labeled dataset rows, and small JSON helpers.

Everything is line-oriented JSON with sorted keys and atomic writes, so a
rerun over identical inputs produces byte-identical files. Graphs serialize
nodes and tagged edges explicitly; feature matrices go as shape plus a
row-major value list.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .cfg import (
    CfgNode,
    ControlFlowGraph,
    Edge,
    EdgeTag,
    LABEL_CLASSES,
    NodeKind,
    StatementKind,
    build_cfg,
    parse_method,
)
from .features import N_FEATURES, annotate_usage, feature_schema, split_at_edge
from .labeling import LabeledExample
from .mining import MethodChangeRecord, Polarity


def write_text_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file and rename, so readers never see partial output."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(target)


def dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def write_json_atomic(path: str | Path, payload: dict) -> None:
    write_text_atomic(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_jsonl_atomic(path: str | Path, payloads: Iterable[dict]) -> None:
    write_text_atomic(path, "".join(dump_json(p) + "\n" for p in payloads))


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


# -- mined records ----------------------------------------------------------


def record_to_dict(record: MethodChangeRecord) -> dict:
    return {
        "repo": record.repo,
        "commit": record.commit,
        "file_path": record.file_path,
        "method": record.method,
        "before_source": record.before_source,
        "after_source": record.after_source,
        "added_spans": [list(span) for span in record.added_spans],
        "polarity": record.polarity.value,
    }


def record_from_dict(data: dict) -> MethodChangeRecord:
    return MethodChangeRecord(
        repo=data["repo"],
        commit=data["commit"],
        file_path=data["file_path"],
        method=data["method"],
        before_source=data["before_source"],
        after_source=data["after_source"],
        added_spans=tuple((int(s), int(e)) for s, e in data["added_spans"]),
        polarity=Polarity(data["polarity"]),
    )


def write_records(path: str | Path, records: Iterable[MethodChangeRecord]) -> None:
    write_jsonl_atomic(path, (record_to_dict(r) for r in records))


def read_records(path: str | Path) -> list[MethodChangeRecord]:
    return [record_from_dict(d) for d in read_jsonl(path)]


# -- graphs ------------------------------------------------------------------


def cfg_to_dict(cfg: ControlFlowGraph) -> dict:
    return {
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "stmt_kind": n.stmt_kind.value if n.stmt_kind else None,
                "expr_kinds": sorted(k.value for k in n.expr_kinds),
                "span": list(n.span),
            }
            for n in cfg.nodes
        ],
        "edges": [[e.src, e.dst, e.tag.value] for e in cfg.edges],
        "entry": cfg.entry_id,
        "exit": cfg.exit_id,
    }


def cfg_from_dict(data: dict) -> ControlFlowGraph:
    nodes = tuple(
        CfgNode(
            id=n["id"],
            kind=NodeKind(n["kind"]),
            stmt_kind=StatementKind(n["stmt_kind"]) if n["stmt_kind"] else None,
            expr_kinds=frozenset(StatementKind(k) for k in n["expr_kinds"]),
            span=(n["span"][0], n["span"][1]),
        )
        for n in data["nodes"]
    )
    edges = tuple(Edge(src, dst, EdgeTag(tag)) for src, dst, tag in data["edges"])
    cfg = ControlFlowGraph(
        nodes=nodes, edges=edges, entry_id=data["entry"], exit_id=data["exit"]
    )
    cfg.validate()
    return cfg


# -- labeled dataset rows ----------------------------------------------------


def labels_to_list(labels: frozenset[StatementKind]) -> list[str]:
    return [k.value for k in LABEL_CLASSES if k in labels]


def labels_from_list(values: list[str]) -> frozenset[StatementKind]:
    return frozenset(StatementKind(v) for v in values)


def label_vector(labels: frozenset[StatementKind]) -> np.ndarray:
    """Multi-hot target in the canonical class order, shape (8,)."""
    return np.array([1.0 if k in labels else 0.0 for k in LABEL_CLASSES])


@dataclass(frozen=True, eq=False)
class DatasetRow:
    """A labeled example materialized with its graph and feature matrix."""

    repo: str
    commit: str
    file_path: str
    method: str
    before_source: str
    cfg: ControlFlowGraph
    features: np.ndarray
    candidate_edge: tuple[int, int]
    positive: bool
    labels: frozenset[StatementKind]

    def split(self):
        return split_at_edge(self.cfg, self.features, self.candidate_edge)


def row_from_example(example: LabeledExample) -> DatasetRow:
    """Materialize graph and features from an example's method source."""
    tree = parse_method(example.before_source)
    cfg = build_cfg(tree)
    return DatasetRow(
        repo=example.repo,
        commit=example.commit,
        file_path=example.file_path,
        method=example.method,
        before_source=example.before_source,
        cfg=cfg,
        features=annotate_usage(tree, cfg),
        candidate_edge=example.candidate_edge,
        positive=example.positive,
        labels=example.labels,
    )


def row_to_dict(row: DatasetRow) -> dict:
    return {
        "repo": row.repo,
        "commit": row.commit,
        "file_path": row.file_path,
        "method": row.method,
        "before_source": row.before_source,
        "cfg": cfg_to_dict(row.cfg),
        "features": {
            "shape": list(row.features.shape),
            "data": row.features.ravel().tolist(),
        },
        "candidate_edge": list(row.candidate_edge),
        "positive": row.positive,
        "labels": labels_to_list(row.labels),
    }


def row_from_dict(data: dict) -> DatasetRow:
    cfg = cfg_from_dict(data["cfg"])
    shape = tuple(data["features"]["shape"])
    if shape != (len(cfg.nodes), N_FEATURES):
        raise ValueError(f"feature matrix shape {shape} does not fit the graph")
    features = np.asarray(data["features"]["data"], dtype=np.float64).reshape(shape)
    edge = (data["candidate_edge"][0], data["candidate_edge"][1])
    if not cfg.has_edge(*edge):
        raise ValueError(f"candidate edge {edge} not present in graph")
    return DatasetRow(
        repo=data["repo"],
        commit=data["commit"],
        file_path=data["file_path"],
        method=data["method"],
        before_source=data["before_source"],
        cfg=cfg,
        features=features,
        candidate_edge=edge,
        positive=bool(data["positive"]),
        labels=labels_from_list(data["labels"]),
    )


def write_dataset(path: str | Path, rows: Iterable[DatasetRow]) -> None:
    write_jsonl_atomic(path, (row_to_dict(r) for r in rows))


def read_dataset(path: str | Path) -> list[DatasetRow]:
    return [row_from_dict(d) for d in read_jsonl(path)]


def write_feature_schema(path: str | Path) -> None:
    write_json_atomic(path, feature_schema())
