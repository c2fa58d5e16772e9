"""JSON, DOT and text views of a repair tree.

Trees are stored as DAGs (equal action sets share a node). Exports show the
tree view: every node keeps only the first edge reaching it in
breadth-first order, unless ``dag=True``.
"""
from __future__ import annotations

import json

from ..aic import RepairTree, TreeEdge
from .render import render_update_set


def tree_edges(t: RepairTree, dag: bool = False) -> list[TreeEdge]:
    if dag:
        return list(t.edges)
    seen = set()
    out = []
    for e in t.edges:
        if e.target not in seen:
            seen.add(e.target)
            out.append(e)
    return out


def _actions(t: RepairTree, actions) -> list[str]:
    text = render_update_set(actions, t.mcs)
    return text.split(", ") if text else []


def tree_to_dict(t: RepairTree, dag: bool = False) -> dict:
    nodes = [{"id": n.id, "actions": _actions(t, n.actions), "flags": n.flags()}
             for n in t.nodes.values()]
    edges = [{"from": t.nodes[e.source].id, "to": t.nodes[e.target].id, "rule": e.label}
             for e in tree_edges(t, dag)]
    return {"strategy": t.strategy, "nodes": nodes, "edges": edges}


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def tree_to_dot(t: RepairTree, dag: bool = False) -> str:
    lines = ["digraph repair_tree {", "  node [shape=box];"]
    for n in t.nodes.values():
        label = "{" + ", ".join(_actions(t, n.actions)) + "}"
        attrs = [f"label={_dot_quote(label)}"]
        if n.grounded_repair:
            attrs.append("shape=doublecircle")
        elif not n.consistent:
            attrs.append("style=dashed")
        lines.append(f"  {_dot_quote(n.id)} [{', '.join(attrs)}];")
    for e in tree_edges(t, dag):
        src, dst = t.nodes[e.source].id, t.nodes[e.target].id
        lines.append(f"  {_dot_quote(src)} -> {_dot_quote(dst)} [label={_dot_quote(e.label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_text(t: RepairTree) -> str:
    children: dict = {}
    for e in tree_edges(t):
        children.setdefault(e.source, []).append(e)
    lines = []

    def walk(key, label, depth):
        node = t.nodes[key]
        marks = [k for k in ("grounded_repair", "weak_repair") if getattr(node, k)]
        if not node.consistent:
            marks.append("inconsistent")
        suffix = f"  [{', '.join(marks)}]" if marks else ""
        prefix = f"--{label}--> " if label else ""
        body = render_update_set(node.actions, t.mcs) or ""
        lines.append("  " * depth + prefix + "{" + body + "}" + suffix)
        for e in children.get(key, []):
            walk(e.target, e.label, depth + 1)

    walk(frozenset(), "", 0)
    return "\n".join(lines) + "\n"


def export_tree(t: RepairTree, fmt: str = "json", dag: bool = False) -> bytes:
    """Serialize a tree as ``json``, ``dot`` or ``text``."""
    if fmt == "json":
        text = json.dumps(tree_to_dict(t, dag), indent=2, ensure_ascii=False) + "\n"
    elif fmt == "dot":
        text = tree_to_dot(t, dag)
    elif fmt == "text":
        text = tree_to_text(t)
    else:
        raise ValueError(f"unknown format {fmt}")
    return text.encode("utf-8")
