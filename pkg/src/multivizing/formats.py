"""Text formats for colorings, run summaries and per-phase statistics.

Coloring files hold one ``edge_id color`` pair per line; ``#`` starts a
comment.  An edge that is absent from the file is uncolored.
"""
from __future__ import annotations

import json
from typing import Optional

from .graph_core import BLANK, Graph, GraphError, _ColoringOps


class ColoringFormatError(GraphError):
    pass


def format_coloring(colors) -> str:
    if isinstance(colors, _ColoringOps):
        colors = colors.to_list()
    return "".join(f"{e} {c}\n" for e, c in enumerate(colors) if c is not BLANK)


def parse_coloring(text: str, m: int) -> list[Optional[int]]:
    """Per-edge colors for a graph with ``m`` edges; missing edges come back BLANK.

    Colors are not range-checked here: an out-of-palette color is a
    verification failure, not a syntax error.
    """
    colors: list[Optional[int]] = [BLANK] * m
    seen: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ColoringFormatError(f"expected 'edge_id color', got {raw.strip()!r}", lineno)
        try:
            e, c = int(parts[0]), int(parts[1])
        except ValueError:
            raise ColoringFormatError(f"non-integer field in {raw.strip()!r}", lineno) from None
        if not 0 <= e < m:
            raise ColoringFormatError(f"edge id {e} outside 0..{m - 1}", lineno)
        if e in seen:
            raise ColoringFormatError(f"edge {e} listed twice", lineno)
        seen.add(e)
        colors[e] = c
    return colors


def summary(graph: Graph, colors) -> dict:
    if isinstance(colors, _ColoringOps):
        colors = colors.to_list()
    return {
        "n": graph.n,
        "m": graph.m,
        "delta": graph.delta,
        "palette": graph.delta + 1,
        "colored_count": sum(c is not BLANK for c in colors),
    }


def dumps(obj) -> str:
    """Canonical single-line JSON, so equal objects give identical bytes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def json_lines(objs) -> str:
    return "".join(dumps(o) + "\n" for o in objs)
