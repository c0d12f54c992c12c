"""Graphviz rendering of game trees."""

from __future__ import annotations

from typing import Optional, Sequence

from .game import GameTree, Internal, iter_nodes, node_at


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(tree: GameTree, highlight: Optional[Sequence[str]] = None) -> str:
    """Deterministic DOT text; nodes are numbered in pre-order."""
    path_on = tuple(highlight) if highlight is not None else None
    if path_on is not None:
        node_at(tree, path_on)  # raises NoSuchHistory for a bad highlight
    ids: dict[tuple[str, ...], str] = {}
    lines = ["digraph game {", "  node [fontname=\"Helvetica\"];", "  edge [fontname=\"Helvetica\"];"]
    edges = []
    for k, (path, node) in enumerate(iter_nodes(tree.root)):
        ids[path] = f"n{k}"
        marked = path_on is not None and path == path_on[:len(path)]
        style = ", color=red, penwidth=2" if marked else ""
        if isinstance(node, Internal):
            label = tree.players[node.player].name
            lines.append(f"  n{k} [shape=circle, label={_quote(label)}{style}];")
        else:
            label = "(" + ", ".join(str(u) for u in node.utilities) + ")"
            lines.append(f"  n{k} [shape=box, label={_quote(label)}{style}];")
        if path:
            edges.append((path[:-1], path, marked))
    for parent, child, marked in edges:
        style = ", color=red, penwidth=2" if marked else ""
        lines.append(f"  {ids[parent]} -> {ids[child]} [label={_quote(child[-1])}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
