"""
Build a statement-level control flow graph from one method
===========================================================

Every analysis in this package starts from the same picture: a method body
as a graph with one virtual entry, one virtual exit, one node per statement,
and two tagged out-edges per branching condition.
"""

from flowgap import build_cfg, enumerate_paths, parse_method

# A small method with a loop and a guard inside it.
SOURCE = '''
def scale_positive(self, points, factor):
    total = 0
    for p in points:
        if p > 0:
            total = total + p
    self.log(total)
    return total * factor
'''

tree = parse_method(SOURCE)
cfg = build_cfg(tree)

# Each node keeps its statement kind and source span; predicates are the
# nodes with a true/false out-edge pair.
print(f"{len(cfg.nodes)} nodes, {len(cfg.edges)} edges")
for node in cfg.nodes:
    kind = node.stmt_kind.value if node.stmt_kind else node.kind.value
    print(f"  [{node.id}] {node.kind.value:<9} {kind:<7} lines {node.span}")

print("\nedges (src -> dst, tag):")
for edge in cfg.edges:
    print(f"  {edge.src} -> {edge.dst}  {edge.tag.value}")

# Conditional behavior shows up as distinct entry-to-exit paths. Loops are
# walked at most once, so the enumeration always terminates.
paths, truncated = enumerate_paths(cfg, max_paths=32)
print(f"\n{len(paths)} acyclic paths (truncated={truncated}):")
for path in paths:
    print("  " + " -> ".join(str(n) for n in path))
