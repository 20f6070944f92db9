"""Statement-granularity control flow graphs for Python methods.

A method body is turned into a directed graph with one node per simple
statement, one predicate node per ``if``/``while``/``for`` condition, plus a
virtual entry and exit node. Unsupported compound statements (``try``,
``with``, ``match``, nested ``def``/``class``, async constructs) are kept as
single opaque statement nodes.
"""

from __future__ import annotations

import ast
import textwrap
import warnings
from dataclasses import dataclass, field
from enum import Enum


class StatementKind(Enum):
    RETURN = "Return"
    ASSIGN = "Assign"
    AUG_ASSIGN = "AugAssign"
    RAISE = "Raise"
    IF = "If"
    CALL = "Call"
    SUBSCRIPT = "Subscript"
    BIN_OP = "BinOp"
    FOR = "For"
    WHILE = "While"
    EXPR = "Expr"
    BREAK = "Break"
    CONTINUE = "Continue"
    PASS = "Pass"
    OTHER = "Other"


#: The eight statement kinds used as classification targets, in canonical order.
LABEL_CLASSES: tuple[StatementKind, ...] = (
    StatementKind.RETURN,
    StatementKind.ASSIGN,
    StatementKind.AUG_ASSIGN,
    StatementKind.RAISE,
    StatementKind.IF,
    StatementKind.CALL,
    StatementKind.SUBSCRIPT,
    StatementKind.BIN_OP,
)

#: Expression-level constructs recorded per node alongside its statement kind.
EXPR_CLASSES: tuple[StatementKind, ...] = (
    StatementKind.CALL,
    StatementKind.SUBSCRIPT,
    StatementKind.BIN_OP,
)


class NodeKind(Enum):
    ENTRY = "entry"
    EXIT = "exit"
    STATEMENT = "statement"
    PREDICATE = "predicate"


class EdgeTag(Enum):
    TRUE_BRANCH = "true_branch"
    FALSE_BRANCH = "false_branch"
    FALLTHROUGH = "fallthrough"


class MethodParseError(ValueError):
    """Source text is not a single well-formed method definition."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.line = line
        self.col = col


class CfgBuildError(ValueError):
    """The syntax tree cannot be turned into a well-formed CFG."""


@dataclass(frozen=True)
class CfgNode:
    id: int
    kind: NodeKind
    stmt_kind: StatementKind | None
    expr_kinds: frozenset[StatementKind]
    span: tuple[int, int]  # 1-based (start_line, end_line); (0, 0) for entry/exit


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    tag: EdgeTag


@dataclass(frozen=True)
class ControlFlowGraph:
    nodes: tuple[CfgNode, ...]
    edges: tuple[Edge, ...]
    entry_id: int
    exit_id: int

    def node(self, node_id: int) -> CfgNode:
        return self.nodes[node_id]

    def out_edges(self, node_id: int) -> list[Edge]:
        return [e for e in self.edges if e.src == node_id]

    def in_edges(self, node_id: int) -> list[Edge]:
        return [e for e in self.edges if e.dst == node_id]

    def successors(self, node_id: int) -> list[int]:
        return [e.dst for e in self.edges if e.src == node_id]

    def predecessors(self, node_id: int) -> list[int]:
        return [e.src for e in self.edges if e.dst == node_id]

    def has_edge(self, src: int, dst: int) -> bool:
        return any(e.src == src and e.dst == dst for e in self.edges)

    def validate(self) -> None:
        """Check the structural invariants; raise CfgBuildError on violation."""
        ids = [n.id for n in self.nodes]
        if ids != list(range(len(self.nodes))):
            raise CfgBuildError("node ids must be dense and 0-based")
        if self.nodes[self.entry_id].kind is not NodeKind.ENTRY:
            raise CfgBuildError("entry_id does not point at an entry node")
        if self.nodes[self.exit_id].kind is not NodeKind.EXIT:
            raise CfgBuildError("exit_id does not point at an exit node")
        if sum(1 for n in self.nodes if n.kind is NodeKind.ENTRY) != 1:
            raise CfgBuildError("exactly one entry node required")
        if sum(1 for n in self.nodes if n.kind is NodeKind.EXIT) != 1:
            raise CfgBuildError("exactly one exit node required")

        seen_pairs = set()
        for e in self.edges:
            if (e.src, e.dst) in seen_pairs:
                raise CfgBuildError(f"duplicate edge ({e.src}, {e.dst})")
            seen_pairs.add((e.src, e.dst))

        out_count = {n.id: 0 for n in self.nodes}
        in_count = {n.id: 0 for n in self.nodes}
        for e in self.edges:
            out_count[e.src] += 1
            in_count[e.dst] += 1
        for n in self.nodes:
            if n.kind is NodeKind.PREDICATE:
                tags = {e.tag for e in self.out_edges(n.id)}
                if out_count[n.id] != 2 or tags != {EdgeTag.TRUE_BRANCH, EdgeTag.FALSE_BRANCH}:
                    raise CfgBuildError(f"predicate {n.id} must have true and false out-edges")
            elif n.kind is NodeKind.EXIT:
                if out_count[n.id] != 0:
                    raise CfgBuildError("exit node must have no out-edges")
            else:
                if out_count[n.id] != 1:
                    raise CfgBuildError(f"node {n.id} must have exactly one out-edge")
        if in_count[self.entry_id] != 0:
            raise CfgBuildError("entry node must have no in-edges")

        fwd = self._reachable_from(self.entry_id, forward=True)
        bwd = self._reachable_from(self.exit_id, forward=False)
        for n in self.nodes:
            if n.id not in fwd or n.id not in bwd:
                raise CfgBuildError(f"node {n.id} is not on an entry-to-exit path")

    def _reachable_from(self, start: int, forward: bool) -> set[int]:
        step = self.successors if forward else self.predecessors
        seen = {start}
        stack = [start]
        while stack:
            for nxt in step(stack.pop()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen


def structurally_equal(a: ControlFlowGraph, b: ControlFlowGraph) -> bool:
    """Kind-and-tag preserving equality under positional node ids.

    Spans are ignored; node kinds, statement kinds, expression kinds, and the
    tagged edge sets must match. Both builders emit nodes in source order, so
    positional comparison is exact for graphs of the same method shape.
    """
    if len(a.nodes) != len(b.nodes):
        return False
    for na, nb in zip(a.nodes, b.nodes):
        if na.kind is not nb.kind or na.stmt_kind is not nb.stmt_kind:
            return False
        if na.expr_kinds != nb.expr_kinds:
            return False
    return set(a.edges) == set(b.edges)


@dataclass(frozen=True)
class MethodTree:
    """A parsed method: dedented source plus its function-definition node."""

    source: str
    func: ast.FunctionDef | ast.AsyncFunctionDef


def parse_method(source: str) -> MethodTree:
    """Parse source holding exactly one function/method definition.

    Class-indented method snippets are accepted (the text is dedented first).
    Raises MethodParseError for invalid syntax or when the text is not a
    single definition.
    """
    dedented = textwrap.dedent(source)
    try:
        # mined methods may carry legacy escape sequences; their warnings
        # belong to the original project, not to this analysis
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SyntaxWarning)
            warnings.simplefilter("ignore", DeprecationWarning)
            module = ast.parse(dedented)
    except SyntaxError as exc:
        raise MethodParseError(
            f"invalid method source: {exc.msg}", line=exc.lineno, col=exc.offset
        ) from exc
    defs = [n for n in module.body if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))]
    if len(module.body) != 1 or len(defs) != 1:
        raise MethodParseError("source must contain exactly one method definition")
    return MethodTree(source=dedented, func=defs[0])


_SIMPLE_STMT_KINDS: dict[type, StatementKind] = {
    ast.Return: StatementKind.RETURN,
    ast.Assign: StatementKind.ASSIGN,
    ast.AnnAssign: StatementKind.ASSIGN,
    ast.AugAssign: StatementKind.AUG_ASSIGN,
    ast.Raise: StatementKind.RAISE,
    ast.Expr: StatementKind.EXPR,
    ast.Pass: StatementKind.PASS,
    ast.Break: StatementKind.BREAK,
    ast.Continue: StatementKind.CONTINUE,
}

_EXPR_KIND_NODES: dict[type, StatementKind] = {
    ast.Call: StatementKind.CALL,
    ast.Subscript: StatementKind.SUBSCRIPT,
    ast.BinOp: StatementKind.BIN_OP,
}


def statement_kind(stmt: ast.stmt) -> StatementKind:
    """Map an AST statement to its kind; unsupported constructs are Other."""
    if isinstance(stmt, ast.If):
        return StatementKind.IF
    if isinstance(stmt, ast.While):
        return StatementKind.WHILE
    if isinstance(stmt, ast.For):
        return StatementKind.FOR
    return _SIMPLE_STMT_KINDS.get(type(stmt), StatementKind.OTHER)


def expr_kinds_in(*roots: ast.AST) -> frozenset[StatementKind]:
    """Expression-construct kinds (Call/Subscript/BinOp) contained in the roots."""
    found = set()
    for root in roots:
        for sub in ast.walk(root):
            kind = _EXPR_KIND_NODES.get(type(sub))
            if kind is not None:
                found.add(kind)
    return frozenset(found)


def _stmt_span(stmt: ast.stmt) -> tuple[int, int]:
    return (stmt.lineno, stmt.end_lineno or stmt.lineno)


def _header_span(stmt: ast.stmt) -> tuple[int, int]:
    # Span of the branching condition only; body statements get their own nodes.
    if isinstance(stmt, (ast.If, ast.While)):
        end = stmt.test.end_lineno or stmt.test.lineno
    elif isinstance(stmt, ast.For):
        end = stmt.iter.end_lineno or stmt.iter.lineno
    else:
        raise TypeError(f"not a predicate statement: {type(stmt).__name__}")
    return (stmt.lineno, end)


@dataclass
class _LoopContext:
    predicate_id: int
    breaks: list[tuple[int, EdgeTag]] = field(default_factory=list)


class _Builder:
    def __init__(self) -> None:
        self.nodes: list[CfgNode] = []
        self.edges: list[Edge] = []
        self.exit_jumps: list[int] = []  # return/raise nodes, wired to exit at the end
        self.loops: list[_LoopContext] = []

    def new_node(
        self,
        kind: NodeKind,
        stmt_kind: StatementKind | None = None,
        expr_kinds: frozenset[StatementKind] = frozenset(),
        span: tuple[int, int] = (0, 0),
    ) -> int:
        node_id = len(self.nodes)
        self.nodes.append(CfgNode(node_id, kind, stmt_kind, expr_kinds, span))
        return node_id

    def add_edge(self, src: int, dst: int, tag: EdgeTag) -> None:
        self.edges.append(Edge(src, dst, tag))

    def connect(self, dangling: list[tuple[int, EdgeTag]], dst: int) -> None:
        for src, tag in dangling:
            self.add_edge(src, dst, tag)

    def emit_block(
        self, stmts: list[ast.stmt], dangling: list[tuple[int, EdgeTag]]
    ) -> list[tuple[int, EdgeTag]]:
        for stmt in stmts:
            if not dangling:
                break  # statically unreachable tail (code after return/raise)
            dangling = self.emit_stmt(stmt, dangling)
        return dangling

    def emit_stmt(
        self, stmt: ast.stmt, dangling: list[tuple[int, EdgeTag]]
    ) -> list[tuple[int, EdgeTag]]:
        kind = statement_kind(stmt)

        if kind is StatementKind.IF:
            pred = self.new_node(
                NodeKind.PREDICATE, kind, expr_kinds_in(stmt.test), _header_span(stmt)
            )
            self.connect(dangling, pred)
            out = self.emit_block(stmt.body, [(pred, EdgeTag.TRUE_BRANCH)])
            if stmt.orelse:
                out += self.emit_block(stmt.orelse, [(pred, EdgeTag.FALSE_BRANCH)])
            else:
                out.append((pred, EdgeTag.FALSE_BRANCH))
            return out

        if kind in (StatementKind.WHILE, StatementKind.FOR):
            if kind is StatementKind.WHILE:
                exprs = expr_kinds_in(stmt.test)
            else:
                exprs = expr_kinds_in(stmt.target, stmt.iter)
            pred = self.new_node(NodeKind.PREDICATE, kind, exprs, _header_span(stmt))
            self.connect(dangling, pred)
            ctx = _LoopContext(pred)
            self.loops.append(ctx)
            body_out = self.emit_block(stmt.body, [(pred, EdgeTag.TRUE_BRANCH)])
            self.connect(body_out, pred)  # loop back to the condition
            self.loops.pop()
            if stmt.orelse:
                out = self.emit_block(stmt.orelse, [(pred, EdgeTag.FALSE_BRANCH)])
            else:
                out = [(pred, EdgeTag.FALSE_BRANCH)]
            return out + ctx.breaks  # break skips any loop-else

        node = self.new_node(NodeKind.STATEMENT, kind, expr_kinds_in(stmt), _stmt_span(stmt))
        self.connect(dangling, node)

        if kind in (StatementKind.RETURN, StatementKind.RAISE):
            self.exit_jumps.append(node)
            return []
        if kind is StatementKind.BREAK:
            if not self.loops:
                raise CfgBuildError("break outside a loop")
            self.loops[-1].breaks.append((node, EdgeTag.FALLTHROUGH))
            return []
        if kind is StatementKind.CONTINUE:
            if not self.loops:
                raise CfgBuildError("continue outside a loop")
            self.add_edge(node, self.loops[-1].predicate_id, EdgeTag.FALLTHROUGH)
            return []
        return [(node, EdgeTag.FALLTHROUGH)]


def build_cfg(tree: MethodTree) -> ControlFlowGraph:
    """Build the CFG of a parsed method.

    Node ids follow source order: entry first, statements in preorder, exit
    last. The build is pure: the same tree always yields an identical graph.
    """
    builder = _Builder()
    entry = builder.new_node(NodeKind.ENTRY)
    dangling = builder.emit_block(tree.func.body, [(entry, EdgeTag.FALLTHROUGH)])
    exit_id = builder.new_node(NodeKind.EXIT)
    builder.connect(dangling, exit_id)
    for node_id in builder.exit_jumps:
        builder.add_edge(node_id, exit_id, EdgeTag.FALLTHROUGH)
    cfg = ControlFlowGraph(
        nodes=tuple(builder.nodes),
        edges=tuple(builder.edges),
        entry_id=entry,
        exit_id=exit_id,
    )
    cfg.validate()
    return cfg


def cfg_for_source(source: str) -> ControlFlowGraph:
    """Convenience wrapper: parse a method and build its CFG."""
    return build_cfg(parse_method(source))


def enumerate_paths(
    cfg: ControlFlowGraph, max_paths: int
) -> tuple[list[tuple[int, ...]], bool]:
    """All entry-to-exit paths using each edge at most once (loops taken once).

    Returns (paths, truncated) with paths in lexicographic node-id order,
    truncated to max_paths when more exist.
    """
    if max_paths <= 0:
        raise ValueError("max_paths must be positive")
    adjacency: dict[int, list[tuple[int, int]]] = {n.id: [] for n in cfg.nodes}
    for idx, e in enumerate(cfg.edges):
        adjacency[e.src].append((e.dst, idx))
    for options in adjacency.values():
        options.sort()

    paths: list[tuple[int, ...]] = []
    truncated = False
    used: set[int] = set()
    trail: list[int] = [cfg.entry_id]

    def walk(node_id: int) -> bool:
        if node_id == cfg.exit_id:
            if len(paths) >= max_paths:
                return False
            paths.append(tuple(trail))
            return True
        for dst, edge_idx in adjacency[node_id]:
            if edge_idx in used:
                continue
            used.add(edge_idx)
            trail.append(dst)
            ok = walk(dst)
            trail.pop()
            used.discard(edge_idx)
            if not ok:
                return False
        return True

    if not walk(cfg.entry_id):
        truncated = True
    paths.sort()
    return paths, truncated
