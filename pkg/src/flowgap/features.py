"""Node feature annotation: how a method's inputs are used at each statement.

Inputs are the method's parameters plus the receiver attributes it touches.
Every CFG node gets a fixed-width numeric row describing which inputs it uses
and inside which constructs, plus one-hot encodings of the node and statement
kind. Rows are aligned with node ids, so the matrix plugs straight into the
graph encoder.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

from .cfg import (
    ControlFlowGraph,
    LABEL_CLASSES,
    MethodTree,
    NodeKind,
    StatementKind,
    statement_kind,
    _header_span,
    _stmt_span,
)

#: Column order of the per-input usage blocks: the eight target statement
#: kinds plus a catch-all for everything else.
USAGE_CLASSES: tuple[StatementKind, ...] = LABEL_CLASSES + (StatementKind.OTHER,)

_NODE_KIND_ORDER: tuple[NodeKind, ...] = (
    NodeKind.ENTRY,
    NodeKind.EXIT,
    NodeKind.STATEMENT,
    NodeKind.PREDICATE,
)

_STMT_KIND_ORDER: tuple[StatementKind, ...] = tuple(StatementKind)

FEATURE_COLUMNS: tuple[str, ...] = (
    tuple(f"param_usage:{k.value}" for k in USAGE_CLASSES)
    + tuple(f"attr_usage:{k.value}" for k in USAGE_CLASSES)
    + tuple(f"node_kind:{k.value}" for k in _NODE_KIND_ORDER)
    + tuple(f"stmt_kind:{k.value}" for k in _STMT_KIND_ORDER)
)

N_FEATURES = len(FEATURE_COLUMNS)  # 9 + 9 + 4 + 15 = 37

_PARAM_BLOCK = 0
_ATTR_BLOCK = len(USAGE_CLASSES)
_NODE_KIND_BLOCK = 2 * len(USAGE_CLASSES)
_STMT_KIND_BLOCK = _NODE_KIND_BLOCK + len(_NODE_KIND_ORDER)

_RECEIVER_NAMES = ("self", "cls")

_EXPR_ANCESTORS: dict[type, StatementKind] = {
    ast.Call: StatementKind.CALL,
    ast.Subscript: StatementKind.SUBSCRIPT,
    ast.BinOp: StatementKind.BIN_OP,
}


def feature_schema() -> dict:
    """Machine-readable description of the feature matrix columns."""
    return {
        "n_features": N_FEATURES,
        "columns": list(FEATURE_COLUMNS),
        "usage_classes": [k.value for k in USAGE_CLASSES],
        "blocks": {
            "param_usage": [_PARAM_BLOCK, _ATTR_BLOCK],
            "attr_usage": [_ATTR_BLOCK, _NODE_KIND_BLOCK],
            "node_kind": [_NODE_KIND_BLOCK, _STMT_KIND_BLOCK],
            "stmt_kind": [_STMT_KIND_BLOCK, N_FEATURES],
        },
    }


@dataclass(frozen=True)
class InputSet:
    """The data a method works on: named parameters and receiver attributes."""

    receiver: str | None
    parameters: tuple[str, ...]
    attributes: tuple[str, ...]


def _signature_names(func: ast.FunctionDef | ast.AsyncFunctionDef) -> list[str]:
    a = func.args
    names = [p.arg for p in a.posonlyargs + a.args]
    if a.vararg:
        names.append(a.vararg.arg)
    names.extend(p.arg for p in a.kwonlyargs)
    if a.kwarg:
        names.append(a.kwarg.arg)
    return names


def _is_receiver_attr(node: ast.AST, receiver: str) -> bool:
    return (
        isinstance(node, ast.Attribute)
        and isinstance(node.value, ast.Name)
        and node.value.id == receiver
    )


def extract_inputs(tree: MethodTree) -> InputSet:
    """Parameters (minus the receiver) and first-level receiver attributes.

    Attributes are listed in first-occurrence order. An attribute that only
    ever appears as the target of a call (``self.update()``) is a method
    reference, not data, and is skipped; ``self.points.append(x)`` still
    yields ``points`` because the call target is one level deeper.
    """
    func = tree.func
    names = _signature_names(func)
    positional = [p.arg for p in func.args.posonlyargs + func.args.args]
    receiver = None
    if positional and positional[0] in _RECEIVER_NAMES:
        receiver = positional[0]
        names.remove(receiver)

    attributes: list[str] = []
    if receiver is not None:
        callee_of = {
            id(n.func) for n in ast.walk(func) if isinstance(n, ast.Call)
        }

        def visit(node: ast.AST) -> None:
            if _is_receiver_attr(node, receiver) and id(node) not in callee_of:
                if node.attr not in attributes:
                    attributes.append(node.attr)
            for child in ast.iter_child_nodes(node):
                visit(child)

        for stmt in func.body:
            visit(stmt)

    return InputSet(receiver, tuple(names), tuple(attributes))


def _node_roots(tree: MethodTree, cfg: ControlFlowGraph) -> dict[int, list[ast.AST]]:
    """Pair each CFG node with the AST fragments it represents.

    Predicate nodes own only their condition (plus the loop target for
    ``for``); body statements have nodes of their own. The builder emits
    nodes in source preorder and skips unreachable tails, so pairing walks
    both sequences in lockstep, dropping AST statements with no node.
    """
    items: list[tuple[StatementKind, tuple[int, int], list[ast.AST]]] = []

    def collect(stmts: list[ast.stmt]) -> None:
        for stmt in stmts:
            kind = statement_kind(stmt)
            if kind is StatementKind.IF:
                items.append((kind, _header_span(stmt), [stmt.test]))
                collect(stmt.body)
                collect(stmt.orelse)
            elif kind is StatementKind.WHILE:
                items.append((kind, _header_span(stmt), [stmt.test]))
                collect(stmt.body)
                collect(stmt.orelse)
            elif kind is StatementKind.FOR:
                items.append((kind, _header_span(stmt), [stmt.target, stmt.iter]))
                collect(stmt.body)
                collect(stmt.orelse)
            else:
                items.append((kind, _stmt_span(stmt), [stmt]))

    collect(tree.func.body)

    roots: dict[int, list[ast.AST]] = {}
    cursor = 0
    for node in cfg.nodes:
        if node.kind in (NodeKind.ENTRY, NodeKind.EXIT):
            continue
        while cursor < len(items) and (
            items[cursor][0] is not node.stmt_kind or items[cursor][1] != node.span
        ):
            cursor += 1  # AST statement the builder skipped as unreachable
        if cursor >= len(items):
            raise ValueError(f"no AST statement found for node {node.id}")
        roots[node.id] = items[cursor][2]
        cursor += 1
    return roots


def _usage_kinds(
    roots: list[ast.AST], inputs: InputSet
) -> dict[tuple[int, str], set[StatementKind]]:
    """Expression constructs each input participates in within the roots.

    Keys are (block, name); values are the set of Call/Subscript/BinOp
    ancestors seen around any occurrence. Presence of a key means the input
    occurs at all.
    """
    params = set(inputs.parameters)
    attrs = set(inputs.attributes)
    found: dict[tuple[int, str], set[StatementKind]] = {}

    def visit(node: ast.AST, active: tuple[StatementKind, ...], callee: ast.AST | None):
        if isinstance(node, ast.Name) and node.id in params:
            found.setdefault((_PARAM_BLOCK, node.id), set()).update(active)
        if (
            inputs.receiver is not None
            and _is_receiver_attr(node, inputs.receiver)
            and node.attr in attrs
            and node is not callee
        ):
            found.setdefault((_ATTR_BLOCK, node.attr), set()).update(active)

        kind = _EXPR_ANCESTORS.get(type(node))
        child_active = active + (kind,) if kind is not None else active
        child_callee = node.func if isinstance(node, ast.Call) else None
        for child in ast.iter_child_nodes(node):
            visit(child, child_active, child_callee)

    for root in roots:
        visit(root, (), None)
    return found


def annotate_usage(tree: MethodTree, cfg: ControlFlowGraph) -> np.ndarray:
    """Build the (n_nodes, N_FEATURES) float feature matrix for a method.

    For every input used by a node, the column of the node's own statement
    kind is incremented once, as is the column of each expression construct
    (call, subscript, binary operation) the input appears inside. Counting is
    per input: repeated occurrences in one node do not add up.
    """
    matrix = np.zeros((len(cfg.nodes), N_FEATURES), dtype=np.float64)
    inputs = extract_inputs(tree)
    roots = _node_roots(tree, cfg)

    for node in cfg.nodes:
        row = matrix[node.id]
        row[_NODE_KIND_BLOCK + _NODE_KIND_ORDER.index(node.kind)] = 1.0
        if node.stmt_kind is not None:
            row[_STMT_KIND_BLOCK + _STMT_KIND_ORDER.index(node.stmt_kind)] = 1.0
        if node.id not in roots:
            continue

        own = node.stmt_kind if node.stmt_kind in USAGE_CLASSES else StatementKind.OTHER
        own_col = USAGE_CLASSES.index(own)
        for (block, _name), expr_kinds in _usage_kinds(roots[node.id], inputs).items():
            row[block + own_col] += 1.0
            for kind in expr_kinds:
                row[block + USAGE_CLASSES.index(kind)] += 1.0
    return matrix


@dataclass(frozen=True)
class SplitExample:
    """A candidate edge's two context subgraphs, ready for encoding.

    ``before`` holds the ancestors of the edge source (source included),
    ``after`` the descendants of the edge target (target included). The
    candidate edge itself belongs to neither side. Adjacency matrices are
    directed and indexed like the node-id tuples; feature rows are copied
    from the full method matrix.
    """

    candidate_edge: tuple[int, int]
    before_ids: tuple[int, ...]
    after_ids: tuple[int, ...]
    adj_before: np.ndarray
    adj_after: np.ndarray
    feat_before: np.ndarray
    feat_after: np.ndarray


def _closure(cfg: ControlFlowGraph, start: int, forward: bool) -> list[int]:
    step = cfg.successors if forward else cfg.predecessors
    seen = {start}
    stack = [start]
    while stack:
        for nxt in step(stack.pop()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return sorted(seen)


def _induced(
    cfg: ControlFlowGraph, ids: list[int], skip: tuple[int, int]
) -> np.ndarray:
    index = {node_id: i for i, node_id in enumerate(ids)}
    adj = np.zeros((len(ids), len(ids)), dtype=np.float64)
    for e in cfg.edges:
        if (e.src, e.dst) == skip:
            continue
        if e.src in index and e.dst in index:
            adj[index[e.src], index[e.dst]] = 1.0
    return adj


def split_at_edge(
    cfg: ControlFlowGraph, features: np.ndarray, edge: tuple[int, int]
) -> SplitExample:
    """Cut the method at a candidate edge into its before/after context.

    The edge must exist in the graph. With loops the two sides may share
    nodes; the candidate edge is excluded from both induced subgraphs.
    """
    src, dst = edge
    if not cfg.has_edge(src, dst):
        raise ValueError(f"candidate edge ({src}, {dst}) not in graph")
    if features.shape != (len(cfg.nodes), N_FEATURES):
        raise ValueError("feature matrix does not match the graph")

    before = _closure(cfg, src, forward=False)
    after = _closure(cfg, dst, forward=True)
    return SplitExample(
        candidate_edge=(src, dst),
        before_ids=tuple(before),
        after_ids=tuple(after),
        adj_before=_induced(cfg, before, (src, dst)),
        adj_after=_induced(cfg, after, (src, dst)),
        feat_before=features[before].copy(),
        feat_after=features[after].copy(),
    )
