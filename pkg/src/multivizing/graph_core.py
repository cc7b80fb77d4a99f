"""Simple graphs, partial edge-colorings and two-colored subgraphs.

Colors are 1-based integers in ``[1, palette]`` with ``palette = delta + 1``.
An uncolored edge holds :data:`BLANK`.  Per-vertex color usage is kept as an
int bitmask (bit ``c`` set iff some incident edge has color ``c``) so that
missing-color and happiness queries are O(1).
"""
from __future__ import annotations

import operator
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

BLANK = None


class GraphError(ValueError):
    """Raised for malformed graph input."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ColoringError(ValueError):
    """A coloring operation was called outside its precondition."""


class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``.

    Edge ids are positions in the input edge sequence.
    """

    __slots__ = ("n", "edges", "adj", "delta", "_index")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        edges = tuple((int(u), int(v)) for u, v in edges)
        if n < 0:
            raise GraphError("vertex count must be non-negative")
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        index: dict[tuple[int, int], int] = {}
        for eid, (u, v) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge {eid} ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"edge {eid} is a self-loop at {u}")
            key = (u, v) if u < v else (v, u)
            if key in index:
                raise GraphError(f"edge {eid} duplicates edge {index[key]} ({u}, {v})")
            index[key] = eid
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        self.n = n
        self.edges = edges
        self.adj = tuple(tuple(a) for a in adj)
        self.delta = max((len(a) for a in adj), default=0)
        self._index = index

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n: Optional[int] = None) -> "Graph":
        edges = list(edges)
        if n is None:
            n = 1 + max((max(u, v) for u, v in edges), default=-1)
        return cls(n, edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def palette(self) -> int:
        return self.delta + 1

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> list[int]:
        return [w for w, _ in self.adj[v]]

    def endpoints(self, e: int) -> tuple[int, int]:
        return self.edges[e]

    def other(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        return b if a == v else a

    def edge_between(self, u: int, v: int) -> Optional[int]:
        return self._index.get((u, v) if u < v else (v, u))

    def shared_vertex(self, e: int, h: int) -> Optional[int]:
        """Common endpoint of two distinct edges, or None if not adjacent."""
        if e == h:
            return None
        a, b = self.edges[e]
        c, d = self.edges[h]
        if a == c or a == d:
            return a
        if b == c or b == d:
            return b
        return None

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, delta={self.delta})"


def parse_edge_list(text: str) -> Graph:
    """Parse the ``u v`` per line edge-list format (``#`` lines are comments)."""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"expected two vertex indices, got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"non-integer vertex index in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphError(f"negative vertex index in {line!r}", lineno)
        if u == v:
            raise GraphError(f"self-loop at vertex {u}", lineno)
        edges.append((u, v, lineno))
    seen: dict[tuple[int, int], int] = {}
    for u, v, lineno in edges:
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {u} {v} (first seen on line {seen[key]})", lineno)
        seen[key] = lineno
    return Graph.from_edges((u, v) for u, v, _ in edges)


def load_graph(source: "str | os.PathLike[str]") -> Graph:
    """Load a graph from an edge-list file path."""
    with open(source, encoding="ascii") as fh:
        return parse_edge_list(fh.read())


def format_edge_list(graph: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in graph.edges)


def lowest_color(mask: int) -> int:
    """Smallest color whose bit is set in ``mask`` (``mask`` must be non-zero)."""
    return (mask & -mask).bit_length() - 1


def iter_colors(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _ColoringOps:
    """Queries shared by :class:`PartialColoring` and :class:`ColoringView`.

    Subclasses provide ``graph``, ``palette``, ``full_mask``, ``color``,
    ``edge_with``, ``used_mask`` and ``set_color``.
    """

    graph: Graph
    palette: int
    full_mask: int

    def color(self, e: int):  # pragma: no cover - abstract
        raise NotImplementedError

    def edge_with(self, v: int, c: int) -> Optional[int]:  # pragma: no cover - abstract
        raise NotImplementedError

    def used_mask(self, v: int) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def set_color(self, e: int, c) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    def missing_mask(self, v: int) -> int:
        return self.full_mask & ~self.used_mask(v)

    def missing_colors(self, v: int) -> set[int]:
        return set(iter_colors(self.missing_mask(v)))

    def is_missing(self, v: int, c: int) -> bool:
        return not (self.used_mask(v) >> c) & 1

    def is_blank(self, e: int) -> bool:
        return self.color(e) is BLANK

    def common_missing_mask(self, e: int) -> int:
        u, v = self.graph.edges[e]
        return self.missing_mask(u) & self.missing_mask(v)

    def is_happy(self, e: int) -> bool:
        if self.color(e) is not BLANK:
            raise ColoringError(f"edge {e} is colored; happiness is defined for blank edges")
        return self.common_missing_mask(e) != 0

    def two_color_degree(self, v: int, a: int, b: int) -> int:
        used = self.used_mask(v)
        return ((used >> a) & 1) + ((used >> b) & 1)

    def clear(self, e: int) -> None:
        self.set_color(e, BLANK)

    def uncolored_edges(self) -> list[int]:
        return [e for e in range(self.graph.m) if self.color(e) is BLANK]

    def colored_count(self) -> int:
        return sum(1 for e in range(self.graph.m) if self.color(e) is not BLANK)

    def to_list(self) -> list:
        return [self.color(e) for e in range(self.graph.m)]


class PartialColoring(_ColoringOps):
    """Mutable partial ``(delta+1)``-edge-coloring.

    ``set_color`` does not check properness; use :func:`is_proper` or the
    higher-level shift operations, which do.
    """

    def __init__(self, graph: Graph, colors: Optional[Iterable] = None, palette: Optional[int] = None):
        self.graph = graph
        self.palette = graph.palette if palette is None else palette
        self.full_mask = ((1 << (self.palette + 1)) - 1) & ~1
        self._colors: list = [BLANK] * graph.m
        self._used = [0] * graph.n
        self._at: list[dict[int, int]] = [{} for _ in range(graph.n)]
        if colors is not None:
            colors = list(colors)
            if len(colors) != graph.m:
                raise ColoringError(f"expected {graph.m} colors, got {len(colors)}")
            for e, c in enumerate(colors):
                if c is not BLANK:
                    self.set_color(e, c)

    def color(self, e: int):
        return self._colors[e]

    def edge_with(self, v: int, c: int) -> Optional[int]:
        return self._at[v].get(c)

    def common_missing_mask(self, e: int) -> int:
        u, v = self.graph.edges[e]
        return self.full_mask & ~(self._used[u] | self._used[v])

    def uncolored_edges(self) -> list[int]:
        return [e for e, c in enumerate(self._colors) if c is BLANK]

    def colored_count(self) -> int:
        return len(self._colors) - self._colors.count(BLANK)

    def to_list(self) -> list:
        return list(self._colors)

    def used_mask(self, v: int) -> int:
        return self._used[v]

    def set_color(self, e: int, c) -> None:
        if c is not BLANK:
            c = operator.index(c)
            if not 1 <= c <= self.palette:
                raise ColoringError(f"color {c} outside palette [1, {self.palette}]")
        old = self._colors[e]
        if old == c:
            return
        u, v = self.graph.edges[e]
        if old is not BLANK:
            for w in (u, v):
                if self._at[w].get(old) == e:
                    del self._at[w][old]
                    self._used[w] &= ~(1 << old)
        self._colors[e] = c
        if c is not BLANK:
            for w in (u, v):
                self._at[w][c] = e
                self._used[w] |= 1 << c

    def copy(self) -> "PartialColoring":
        new = PartialColoring.__new__(PartialColoring)
        new.graph = self.graph
        new.palette = self.palette
        new.full_mask = self.full_mask
        new._colors = list(self._colors)
        new._used = list(self._used)
        new._at = [dict(d) for d in self._at]
        return new

    def fork(self) -> "ColoringView":
        """Copy-on-write view; mutations never reach ``self``."""
        return ColoringView(self)

    def apply(self, changes: dict) -> None:
        """Write a batch of ``edge -> color`` changes."""
        # blank first so transient clashes never corrupt the per-vertex index
        for e in changes:
            self.set_color(e, BLANK)
        for e, c in changes.items():
            if c is not BLANK:
                self.set_color(e, c)

    def bitsets_consistent(self) -> bool:
        """Recompute the per-vertex bookkeeping from scratch and compare."""
        used = [0] * self.graph.n
        at: list[dict[int, int]] = [{} for _ in range(self.graph.n)]
        for e, c in enumerate(self._colors):
            if c is BLANK:
                continue
            for w in self.graph.edges[e]:
                used[w] |= 1 << c
                at[w][c] = e
        return used == self._used and at == self._at

    def __eq__(self, other) -> bool:
        if isinstance(other, _ColoringOps):
            return self.graph is other.graph and self.to_list() == other.to_list()
        return NotImplemented

    def __repr__(self) -> str:
        return f"PartialColoring(colored={self.colored_count()}/{self.graph.m}, palette={self.palette})"


class ColoringView(_ColoringOps):
    """Overlay on a frozen :class:`PartialColoring`.

    Only touched edges and vertices are stored, so forking is O(1) and a
    multi-step chain search never copies the whole coloring.
    """

    def __init__(self, base: PartialColoring):
        self.base = base
        self.graph = base.graph
        self.palette = base.palette
        self.full_mask = base.full_mask
        self._colors: dict[int, object] = {}
        self._used: dict[int, int] = {}
        self._at: dict[tuple[int, int], Optional[int]] = {}

    def color(self, e: int):
        colors = self._colors
        if e in colors:
            return colors[e]
        return self.base._colors[e]

    def edge_with(self, v: int, c: int) -> Optional[int]:
        key = (v, c)
        at = self._at
        if key in at:
            return at[key]
        return self.base._at[v].get(c)

    def used_mask(self, v: int) -> int:
        used = self._used.get(v)
        return self.base._used[v] if used is None else used

    def set_color(self, e: int, c) -> None:
        if c is not BLANK:
            c = operator.index(c)
            if not 1 <= c <= self.palette:
                raise ColoringError(f"color {c} outside palette [1, {self.palette}]")
        old = self.color(e)
        if old == c:
            return
        u, v = self.graph.edges[e]
        if old is not BLANK:
            for w in (u, v):
                if self.edge_with(w, old) == e:
                    self._at[(w, old)] = None
                    self._used[w] = self.used_mask(w) & ~(1 << old)
        self._colors[e] = c
        if c is not BLANK:
            for w in (u, v):
                self._at[(w, c)] = e
                self._used[w] = self.used_mask(w) | (1 << c)

    def snapshot(self) -> "ColoringView":
        """Independent copy of this view over the same base."""
        new = ColoringView(self.base)
        new._colors = dict(self._colors)
        new._used = dict(self._used)
        new._at = dict(self._at)
        return new

    def fork(self) -> "ColoringView":
        return self.snapshot()

    def changes(self) -> dict:
        """Edges whose color differs from the base."""
        base = self.base._colors
        return {e: c for e, c in self._colors.items() if base[e] != c}

    def materialize(self) -> PartialColoring:
        out = self.base.copy()
        out.apply(self.changes())
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, _ColoringOps):
            return self.graph is other.graph and self.to_list() == other.to_list()
        return NotImplemented


def missing_colors(coloring: _ColoringOps, x: int) -> set[int]:
    return coloring.missing_colors(x)


def is_happy(coloring: _ColoringOps, e: int) -> bool:
    return coloring.is_happy(e)


def smallest_common_missing(coloring: _ColoringOps, e: int) -> Optional[int]:
    mask = coloring.common_missing_mask(e)
    return lowest_color(mask) if mask else None


@dataclass(frozen=True)
class Component:
    """Connected component of the subgraph of edges colored ``a`` or ``b``.

    For a path, ``vertices`` runs from one endpoint to the other (starting at
    the query vertex when it is an endpoint); for a cycle it starts at the
    query vertex.  ``degree`` is the query vertex's degree in the subgraph.
    """

    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    is_cycle: bool
    degree: int

    @property
    def is_path(self) -> bool:
        return not self.is_cycle

    @property
    def ends(self) -> tuple[int, int]:
        return self.vertices[0], self.vertices[-1]


def _check_pair(a: int, b: int) -> None:
    if a == b:
        raise ColoringError(f"two-color queries need distinct colors, got {a} twice")


def walk_alternating(coloring: _ColoringOps, start: int, first: int, a: int, b: int,
                     limit: Optional[int] = None) -> tuple[list[int], list[int]]:
    """Follow the ``ab``-colored walk from ``start`` leaving along color ``first``.

    Returns ``(vertices, edges)`` with ``vertices[0] == start``.  Stops at a
    vertex with no continuation, on returning to ``start`` (a cycle; the last
    vertex is then ``start`` again), or after ``limit`` edges.
    """
    graph = coloring.graph
    vertices = [start]
    edges: list[int] = []
    v, c = start, first
    while limit is None or len(edges) < limit:
        e = coloring.edge_with(v, c)
        if e is None:
            break
        v = graph.other(e, v)
        edges.append(e)
        vertices.append(v)
        if v == start:
            break
        if len(edges) > graph.n:
            raise AssertionError("two-colored walk exceeded n edges")
        c = b if c == a else a
    return vertices, edges


def two_color_component(coloring: _ColoringOps, x: int, a: int, b: int) -> Component:
    _check_pair(a, b)
    ea, eb = coloring.edge_with(x, a), coloring.edge_with(x, b)
    degree = (ea is not None) + (eb is not None)
    if degree == 0:
        return Component((x,), (), False, 0)
    if degree == 1:
        vs, es = walk_alternating(coloring, x, a if ea is not None else b, a, b)
        return Component(tuple(vs), tuple(es), False, 1)
    vs, es = walk_alternating(coloring, x, a, a, b)
    if vs[-1] == x and len(es) > 0:
        return Component(tuple(vs[:-1]), tuple(es), True, 2)
    back_vs, back_es = walk_alternating(coloring, x, b, a, b)
    vertices = tuple(reversed(back_vs)) + tuple(vs[1:])
    edges = tuple(reversed(back_es)) + tuple(es)
    return Component(vertices, edges, False, 2)


def component_ends(coloring: _ColoringOps, v: int, a: int, b: int) -> Optional[tuple[int, int]]:
    """Endpoints of the ``ab``-path through ``v``; None when it is a cycle."""
    comp = two_color_component(coloring, v, a, b)
    return None if comp.is_cycle else comp.ends


def path_end(coloring: _ColoringOps, v: int, a: int, b: int) -> int:
    """Other endpoint of the ``ab``-path that has ``v`` as an endpoint."""
    if coloring.edge_with(v, a) is not None:
        first = a
    elif coloring.edge_with(v, b) is not None:
        first = b
    else:
        return v
    vs, _ = walk_alternating(coloring, v, first, a, b)
    return vs[-1]


def are_related(coloring: _ColoringOps, x: int, y: int, a: int, b: int) -> bool:
    _check_pair(a, b)
    if x == y:
        return True
    return y in two_color_component(coloring, x, a, b).vertices


def endpoints_related(coloring: _ColoringOps, x: int, y: int, a: int, b: int) -> bool:
    """Relatedness of two vertices that each have ``ab``-degree below 2.

    Both walks advance in lockstep so the cost is the shorter path length.
    """
    if x == y:
        return True
    walkers = []
    for s in (x, y):
        if coloring.edge_with(s, a) is not None:
            walkers.append([s, a])
        elif coloring.edge_with(s, b) is not None:
            walkers.append([s, b])
        else:
            return False
    graph = coloring.graph
    targets = (y, x)
    for _ in range(graph.n + 1):
        for i, w in enumerate(walkers):
            v, c = w
            e = coloring.edge_with(v, c)
            if e is None:
                return v == targets[i]
            v = graph.other(e, v)
            if v == targets[i]:
                return True
            w[0] = v
            w[1] = b if c == a else a
    raise AssertionError("two-colored walk exceeded n edges")


def is_proper(coloring: _ColoringOps) -> bool:
    """Full-scan properness check, independent of the cached bitsets."""
    return first_clash(coloring) is None


def first_clash(coloring: _ColoringOps) -> Optional[tuple[int, int]]:
    graph = coloring.graph
    for v in range(graph.n):
        seen: dict = {}
        for _, e in graph.adj[v]:
            c = coloring.color(e)
            if c is BLANK:
                continue
            if c in seen:
                return (seen[c], e)
            seen[c] = e
    return None
