"""Rank a method's control-flow edges as places to hang a missing branch.

Every edge of the method's graph is scored by the extension-point model;
the top candidates optionally get a statement-kind profile from the
multi-label model, describing what the absent branch would likely contain.
"""

from __future__ import annotations

from .cfg import LABEL_CLASSES, build_cfg, parse_method
from .features import annotate_usage, split_at_edge
from .gcn import GcnModel, predict_proba


def recommend(
    source: str,
    edge_model: GcnModel,
    kinds_model: GcnModel | None = None,
    top_k: int = 3,
) -> dict:
    """Score all candidate edges of one method; return the ranked top_k.

    The edge model must emit a single output, the kinds model eight. Result
    edges carry the line spans of their endpoints so the location is easy to
    find in the source.
    """
    if top_k < 1:
        raise ValueError("top_k must be positive")
    if edge_model.config.out_dim != 1:
        raise ValueError("edge model must have a single output")
    if kinds_model is not None and kinds_model.config.out_dim != len(LABEL_CLASSES):
        raise ValueError(f"kinds model must have {len(LABEL_CLASSES)} outputs")

    tree = parse_method(source)
    cfg = build_cfg(tree)
    features = annotate_usage(tree, cfg)

    scored = []
    for edge in cfg.edges:
        split = split_at_edge(cfg, features, (edge.src, edge.dst))
        score = float(predict_proba(edge_model, split)[0])
        scored.append((score, (edge.src, edge.dst), split))
    scored.sort(key=lambda item: (-item[0], item[1]))

    candidates = []
    for score, (src, dst), split in scored[:top_k]:
        entry = {
            "edge": [src, dst],
            "score": score,
            "src_span": list(cfg.node(src).span),
            "dst_span": list(cfg.node(dst).span),
        }
        if kinds_model is not None:
            proba = predict_proba(kinds_model, split)
            ranked = sorted(
                zip(LABEL_CLASSES, proba.tolist()), key=lambda kv: (-kv[1], kv[0].value)
            )
            entry["kinds"] = [
                {"kind": kind.value, "score": float(p)} for kind, p in ranked
            ]
        candidates.append(entry)

    return {
        "method": tree.func.name,
        "n_nodes": len(cfg.nodes),
        "n_edges": len(cfg.edges),
        "candidates": candidates,
    }
