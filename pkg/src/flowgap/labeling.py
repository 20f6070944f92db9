"""Turn mined method changes into labeled extension-point examples.

A branch-adding change is replayed backwards: the statements the commit
added are removed from the after-graph and the flow is reconnected, which
must reproduce the method's pre-commit graph exactly. The edge where the
removed guard hung is the positive candidate edge; the statement kinds found
in the removed branch are its labels. Non-branch-adding changes contribute
negative candidate edges at the spot where their change landed.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, replace
from enum import Enum

from .cfg import (
    CfgBuildError,
    ControlFlowGraph,
    EdgeTag,
    Edge,
    LABEL_CLASSES,
    MethodParseError,
    NodeKind,
    StatementKind,
    build_cfg,
    parse_method,
    structurally_equal,
)
from .mining import MethodChangeRecord, Polarity


class DropReason(Enum):
    PARSE_DIFF_FAIL = "parse_diff_fail"
    NO_ADDED_PREDICATE = "no_added_predicate"
    AMBIGUOUS_INSERTION = "ambiguous_insertion"
    PRUNE_MISMATCH = "prune_mismatch"
    NO_LABEL = "no_label"
    NO_SITE = "no_site"


@dataclass(frozen=True)
class LabeledExample:
    """One candidate edge in a method's pre-change graph.

    candidate_edge refers to node ids of the graph built from before_source.
    Positive examples carry the statement kinds of the branch the change
    added; negatives have an empty label set.
    """

    repo: str
    commit: str
    file_path: str
    method: str
    before_source: str
    candidate_edge: tuple[int, int]
    positive: bool
    labels: frozenset[StatementKind]


@dataclass(frozen=True)
class PrunedBlock:
    """One removed guard block: where it hung and what it contained."""

    candidate_edges: tuple[tuple[int, int], ...]  # pruned-graph node ids
    labels: frozenset[StatementKind]


@dataclass(frozen=True)
class PruneResult:
    pruned: ControlFlowGraph
    blocks: tuple[PrunedBlock, ...]
    removed_ids: tuple[int, ...]


def _added_lines(spans: tuple[tuple[int, int], ...]) -> set[int]:
    return {line for s, e in spans for line in range(s, e + 1)}


def _node_is_added(node, lines: set[int]) -> bool:
    if node.kind in (NodeKind.ENTRY, NodeKind.EXIT):
        return False
    s, e = node.span
    return all(line in lines for line in range(s, e + 1))


def _block_labels(cfg: ControlFlowGraph, pred_id: int, removed: set[int]) -> frozenset:
    """Statement kinds inside one added guard, condition excluded."""
    seen: set[int] = set()
    stack = [d for d in cfg.successors(pred_id) if d in removed]
    labels: set[StatementKind] = set()
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        node = cfg.node(nid)
        if node.stmt_kind in LABEL_CLASSES:
            labels.add(node.stmt_kind)
        labels.update(node.expr_kinds & set(LABEL_CLASSES))
        stack.extend(d for d in cfg.successors(nid) if d in removed and d not in seen)
    return frozenset(labels)


def prune_added_path(
    cfg: ControlFlowGraph, added_spans: tuple[tuple[int, int], ...]
) -> PruneResult | None:
    """Remove every node whose lines were all added; reconnect the flow.

    Removed statements are bypassed to their successor; removed predicates
    to their false branch, since the true branch holds the added path and
    the false branch continues the original code. Returns None when the
    bypass chains loop or the reconnected graph breaks a CFG invariant,
    meaning the insertion cannot be undone unambiguously.
    """
    lines = _added_lines(added_spans)
    removed = {n.id for n in cfg.nodes if _node_is_added(n, lines)}
    if not removed:
        return PruneResult(cfg, (), ())

    def bypass(nid: int) -> int | None:
        hops: set[int] = set()
        while nid in removed:
            if nid in hops:
                return None
            hops.add(nid)
            node = cfg.node(nid)
            if node.kind is NodeKind.PREDICATE:
                nid = next(
                    e.dst for e in cfg.out_edges(nid) if e.tag is EdgeTag.FALSE_BRANCH
                )
            else:
                nid = cfg.successors(nid)[0]
        return nid

    healed: list[Edge] = []
    for e in cfg.edges:
        if e.src in removed:
            continue
        if e.dst in removed:
            target = bypass(e.dst)
            if target is None:
                return None
            healed.append(Edge(e.src, target, e.tag))
        else:
            healed.append(e)

    alive = sorted(n.id for n in cfg.nodes if n.id not in removed)
    new_id = {old: new for new, old in enumerate(alive)}
    nodes = tuple(replace(cfg.node(old), id=new_id[old]) for old in alive)
    edges = tuple(Edge(new_id[e.src], new_id[e.dst], e.tag) for e in healed)
    pruned = ControlFlowGraph(
        nodes=nodes,
        edges=edges,
        entry_id=new_id[cfg.entry_id],
        exit_id=new_id[cfg.exit_id],
    )
    try:
        pruned.validate()
    except CfgBuildError:
        return None

    blocks = []
    guard_ids = sorted(
        nid
        for nid in removed
        if cfg.node(nid).stmt_kind is StatementKind.IF
        and any(e.src not in removed for e in cfg.in_edges(nid))
    )
    for pred_id in guard_ids:
        landing = bypass(pred_id)
        if landing is None:
            return None
        candidates = tuple(
            sorted(
                (new_id[e.src], new_id[landing])
                for e in cfg.in_edges(pred_id)
                if e.src not in removed
            )
        )
        blocks.append(PrunedBlock(candidates, _block_labels(cfg, pred_id, removed)))
    return PruneResult(pruned, tuple(blocks), tuple(sorted(removed)))


def _insertion_line_in_before(record: MethodChangeRecord) -> int | None:
    """First before-source line displaced by the change (1-based)."""
    matcher = difflib.SequenceMatcher(
        a=record.before_source.splitlines(),
        b=record.after_source.splitlines(),
        autojunk=False,
    )
    for op, i1, _i2, _j1, _j2 in matcher.get_opcodes():
        if op in ("insert", "replace"):
            return i1 + 1
    return None


def negative_candidate_edge(
    cfg: ControlFlowGraph, insertion_line: int
) -> tuple[int, int]:
    """The edge a change landed on: out-edge of the last node ending above it.

    Falls back to the entry's out-edge when the change precedes every
    statement. When the preceding node is a predicate the insertion sits on
    its first body line, so the true branch is the site.
    """
    last = None
    for node in cfg.nodes:
        if node.kind in (NodeKind.ENTRY, NodeKind.EXIT):
            continue
        if node.span[1] < insertion_line and (last is None or node.span[1] > cfg.node(last).span[1]):
            last = node.id
    if last is None:
        edge = cfg.out_edges(cfg.entry_id)[0]
        return (edge.src, edge.dst)
    out = cfg.out_edges(last)
    if cfg.node(last).kind is NodeKind.PREDICATE:
        edge = next(e for e in out if e.tag is EdgeTag.TRUE_BRANCH)
    else:
        edge = out[0]
    return (edge.src, edge.dst)


def label_record(
    record: MethodChangeRecord,
) -> tuple[list[LabeledExample], DropReason | None]:
    """Convert one mined record into examples, or report why it cannot be.

    Positives must survive the prune round trip: removing the added nodes
    from the after-graph has to reproduce the before-graph exactly, node for
    node. That guards against insertions that also moved or rewrote the
    surrounding code.
    """
    try:
        before_cfg = build_cfg(parse_method(record.before_source))
        after_cfg = build_cfg(parse_method(record.after_source))
    except (MethodParseError, CfgBuildError):
        return [], DropReason.PARSE_DIFF_FAIL

    def example(edge: tuple[int, int], positive: bool, labels: frozenset) -> LabeledExample:
        return LabeledExample(
            repo=record.repo,
            commit=record.commit,
            file_path=record.file_path,
            method=record.method,
            before_source=record.before_source,
            candidate_edge=edge,
            positive=positive,
            labels=labels,
        )

    if record.polarity is Polarity.PATH_ADDING:
        result = prune_added_path(after_cfg, record.added_spans)
        if result is None:
            return [], DropReason.AMBIGUOUS_INSERTION
        if not result.blocks:
            return [], DropReason.NO_ADDED_PREDICATE
        if not structurally_equal(result.pruned, before_cfg):
            return [], DropReason.PRUNE_MISMATCH
        examples = [
            example(edge, True, block.labels)
            for block in result.blocks
            if block.labels
            for edge in block.candidate_edges
        ]
        if not examples:
            return [], DropReason.NO_LABEL
        return examples, None

    insertion = _insertion_line_in_before(record)
    if insertion is None:
        return [], DropReason.NO_SITE
    edge = negative_candidate_edge(before_cfg, insertion)
    return [example(edge, False, frozenset())], None
