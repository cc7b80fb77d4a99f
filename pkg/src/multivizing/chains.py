"""Chains, color shifts, alternating paths and fans.

A chain is a sequence of edges in which consecutive edges are adjacent.
Shifting a coloring along a chain ``(e0, e1, ..., ek)`` moves the color of
``e1`` onto ``e0``, then the color of ``e2`` onto ``e1`` and so on, leaving
``ek`` blank.  A chain is *happy* when it can be shifted properly and its
last edge then has a color missing at both endpoints, so the whole chain
can be colored.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .graph_core import (
    BLANK,
    ColoringError,
    ColoringView,
    Graph,
    PartialColoring,
    _ColoringOps,
    endpoints_related,
    iter_colors,
    lowest_color,
    walk_alternating,
)


class ShiftError(ColoringError):
    """A shift was requested along a pair or chain that is not shiftable."""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message)


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class Chain:
    edges: tuple[int, ...]

    def __post_init__(self):
        if not self.edges:
            raise ChainError("a chain has at least one edge")

    @property
    def start(self) -> int:
        return self.edges[0]

    @property
    def end(self) -> int:
        return self.edges[-1]

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def length(self) -> int:
        return len(self.edges)

    def edge_set(self) -> frozenset[int]:
        return frozenset(self.edges)

    def vertex_set(self, graph: Graph) -> set[int]:
        out: set[int] = set()
        for e in self.edges:
            out.update(graph.edges[e])
        return out

    def reverse(self) -> "Chain":
        return Chain(self.edges[::-1])

    def initial_segment(self, k: int) -> "Chain":
        if not 1 <= k <= len(self.edges):
            raise ChainError(f"initial segment length {k} outside 1..{len(self.edges)}")
        return Chain(self.edges[:k])

    def combine(self, other: "Chain") -> "Chain":
        if self.end != other.start:
            raise ChainError(f"cannot combine: last edge {self.end} != first edge {other.start}")
        return Chain(self.edges + other.edges[1:])

    __add__ = combine

    def validate(self, graph: Graph) -> None:
        for i in range(len(self.edges) - 1):
            if self.edges[i] == self.edges[i + 1]:
                raise ChainError(f"edges at positions {i} and {i + 1} are the same edge")
            if graph.shared_vertex(self.edges[i], self.edges[i + 1]) is None:
                raise ChainError(f"edges at positions {i} and {i + 1} are not adjacent")

    def to_json(self) -> dict:
        return {"kind": "chain", "edges": list(self.edges)}


@dataclass(frozen=True)
class PathChain(Chain):
    """Chain forming a simple path ``vertices[0] - vertices[1] - ...``."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        super().__post_init__()
        if len(self.vertices) != len(self.edges) + 1:
            raise ChainError("a path of k edges has k + 1 vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise ChainError("path vertices must be pairwise distinct")

    @classmethod
    def from_vertices(cls, graph: Graph, vertices) -> "PathChain":
        vertices = tuple(vertices)
        edges = []
        for a, b in zip(vertices, vertices[1:]):
            e = graph.edge_between(a, b)
            if e is None:
                raise ChainError(f"{a} and {b} are not adjacent")
            edges.append(e)
        return cls(tuple(edges), vertices)

    @property
    def vstart(self) -> int:
        return self.vertices[0]

    @property
    def vend(self) -> int:
        return self.vertices[-1]

    def initial_segment(self, k: int) -> "PathChain":
        if not 1 <= k <= len(self.edges):
            raise ChainError(f"initial segment length {k} outside 1..{len(self.edges)}")
        return PathChain(self.edges[:k], self.vertices[: k + 1])

    def reverse(self) -> "PathChain":
        return PathChain(self.edges[::-1], self.vertices[::-1])

    def vertex_set(self, graph: Graph) -> set[int]:
        return set(self.vertices)

    def to_json(self) -> dict:
        return {"kind": "path", "edges": list(self.edges), "vertices": list(self.vertices)}


@dataclass(frozen=True)
class Fan(Chain):
    """Chain ``(x y0, x y1, ...)`` of edges at a common pivot ``x``."""

    pivot: int
    leaves: tuple[int, ...]

    def __post_init__(self):
        super().__post_init__()
        if len(self.leaves) != len(self.edges):
            raise ChainError("a fan has one leaf per edge")
        if len(set(self.leaves)) != len(self.leaves):
            raise ChainError("fan leaves must be pairwise distinct")

    @classmethod
    def build(cls, graph: Graph, pivot: int, leaves) -> "Fan":
        leaves = tuple(leaves)
        edges = []
        for y in leaves:
            e = graph.edge_between(pivot, y)
            if e is None:
                raise ChainError(f"leaf {y} is not adjacent to pivot {pivot}")
            edges.append(e)
        return cls(tuple(edges), pivot, leaves)

    @property
    def vend(self) -> int:
        return self.leaves[-1]

    def initial_segment(self, k: int) -> "Fan":
        if not 1 <= k <= len(self.edges):
            raise ChainError(f"initial segment length {k} outside 1..{len(self.edges)}")
        return Fan(self.edges[:k], self.pivot, self.leaves[:k])

    def vertex_set(self, graph: Graph) -> set[int]:
        return {self.pivot, *self.leaves}

    def to_json(self) -> dict:
        return {"kind": "fan", "edges": list(self.edges), "pivot": self.pivot,
                "leaves": list(self.leaves)}


def reverse(chain: Chain) -> Chain:
    return chain.reverse()


def initial_segment(chain: Chain, k: int) -> Chain:
    return chain.initial_segment(k)


def combine(first: Chain, second: Chain) -> Chain:
    return first.combine(second)


# --- shifts -----------------------------------------------------------------

def shift_pair_problem(coloring: _ColoringOps, e0: int, e1: int) -> Optional[str]:
    """Why ``(e0, e1)`` is not shiftable, or None if it is."""
    graph = coloring.graph
    shared = graph.shared_vertex(e0, e1)
    if shared is None:
        return f"edges {e0} and {e1} are not adjacent"
    if coloring.color(e0) is not BLANK:
        return f"edge {e0} is already colored"
    c = coloring.color(e1)
    if c is BLANK:
        return f"edge {e1} is blank"
    far = graph.other(e0, shared)
    if not coloring.is_missing(far, c):
        return f"color {c} of edge {e1} is not missing at vertex {far}"
    return None


def _copy(coloring: _ColoringOps) -> _ColoringOps:
    if isinstance(coloring, ColoringView):
        return coloring.snapshot()
    return coloring.copy()


def _shift_pair_in_place(coloring: _ColoringOps, e0: int, e1: int) -> None:
    c = coloring.color(e1)
    coloring.set_color(e1, BLANK)
    coloring.set_color(e0, c)


def shift_pair(coloring: _ColoringOps, e0: int, e1: int):
    """Coloring with the color of ``e1`` moved onto the blank edge ``e0``."""
    problem = shift_pair_problem(coloring, e0, e1)
    if problem is not None:
        raise ShiftError(f"pair ({e0}, {e1}) is not shiftable: {problem}", 0)
    out = _copy(coloring)
    _shift_pair_in_place(out, e0, e1)
    return out


def shift_in_place(coloring: _ColoringOps, edges, check: bool = True) -> None:
    """Shift along ``edges`` mutating ``coloring``.

    With ``check`` each pair is validated before it is shifted; on failure the
    coloring is left partially shifted and :class:`ShiftError` carries the
    index of the failing pair.
    """
    for i in range(len(edges) - 1):
        e0, e1 = edges[i], edges[i + 1]
        if check:
            problem = shift_pair_problem(coloring, e0, e1)
            if problem is not None:
                raise ShiftError(f"chain not shiftable at pair {i}: {problem}", i)
        _shift_pair_in_place(coloring, e0, e1)


def first_unshiftable(coloring: _ColoringOps, chain: Chain) -> Optional[int]:
    """Index ``i`` of the first pair ``(e_i, e_i+1)`` that fails, or None."""
    edges = chain.edges
    if len(edges) == 1:
        return None
    work = coloring.fork()
    try:
        shift_in_place(work, edges)
    except ShiftError as exc:
        return exc.index
    return None


def is_chain_shiftable(coloring: _ColoringOps, chain: Chain) -> bool:
    return first_unshiftable(coloring, chain) is None


def shift_chain(coloring: _ColoringOps, chain: Chain):
    """New coloring obtained by shifting along ``chain``; the input is untouched."""
    bad = first_unshiftable(coloring, chain)
    if bad is not None:
        raise ShiftError(f"chain is not shiftable at pair {bad}", bad)
    out = _copy(coloring)
    shift_in_place(out, chain.edges, check=False)
    return out


def is_chain_happy(coloring: _ColoringOps, chain: Chain) -> bool:
    if not is_chain_shiftable(coloring, chain):
        return False
    work = coloring.fork()
    shift_in_place(work, chain.edges, check=False)
    return work.color(chain.end) is BLANK and work.common_missing_mask(chain.end) != 0


def augment_in_place(coloring: _ColoringOps, chain: Chain, check: bool = True) -> int:
    """Shift along a happy chain and color its last edge; returns that color."""
    shift_in_place(coloring, chain.edges, check=check)
    mask = coloring.common_missing_mask(chain.end)
    if not mask:
        raise ColoringError(f"chain ending at edge {chain.end} is not happy")
    c = lowest_color(mask)
    coloring.set_color(chain.end, c)
    return c


def augment_with_happy_chain(coloring: _ColoringOps, chain: Chain):
    """Coloring extended by one edge using a happy chain; the input is untouched."""
    if not is_chain_happy(coloring, chain):
        raise ColoringError("chain is not happy for this coloring")
    out = _copy(coloring)
    augment_in_place(out, chain, check=False)
    return out


# --- hopeful / successful ---------------------------------------------------

def _blank_edge(coloring: _ColoringOps, x: int, y: int) -> int:
    e = coloring.graph.edge_between(x, y)
    if e is None:
        raise ColoringError(f"{x} and {y} are not adjacent")
    if coloring.color(e) is not BLANK:
        raise ColoringError(f"edge {x}-{y} is colored")
    return e


def is_edge_hopeful(coloring: _ColoringOps, x: int, y: int, a: int, b: int) -> bool:
    e = _blank_edge(coloring, x, y)
    if coloring.is_happy(e):
        return False
    return coloring.two_color_degree(x, a, b) < 2 and coloring.two_color_degree(y, a, b) < 2


def is_edge_successful(coloring: _ColoringOps, x: int, y: int, a: int, b: int) -> bool:
    return is_edge_hopeful(coloring, x, y, a, b) and not endpoints_related(coloring, x, y, a, b)


def is_fan_hopeful(coloring: _ColoringOps, fan: Fan, a: int, b: int) -> bool:
    if not is_chain_shiftable(coloring, fan) or is_chain_happy(coloring, fan):
        return False
    return (coloring.two_color_degree(fan.pivot, a, b) < 2
            and coloring.two_color_degree(fan.vend, a, b) < 2)


def is_fan_successful(coloring: _ColoringOps, fan: Fan, a: int, b: int) -> bool:
    if not is_fan_hopeful(coloring, fan, a, b):
        return False
    shifted = coloring.fork()
    shift_in_place(shifted, fan.edges, check=False)
    return not endpoints_related(shifted, fan.pivot, fan.vend, a, b)


# --- alternating paths ------------------------------------------------------

def alternating_path(coloring: _ColoringOps, x: int, y: int, a: int, b: int) -> Chain:
    """The chain ``(xy, e1, ..., ek)`` where ``e1..ek`` is the ``ab``-path from ``y``.

    Returns a :class:`PathChain` (starting at ``x``) when the path avoids ``x``,
    which is exactly the case when ``xy`` is successful.
    """
    e = _blank_edge(coloring, x, y)
    if a == b:
        raise ColoringError("alternating path needs two distinct colors")
    if coloring.is_happy(e):
        raise ColoringError(f"edge {x}-{y} is happy")
    if coloring.two_color_degree(x, a, b) >= 2:
        raise ColoringError(f"edge {x}-{y} is not hopeful: {x} has both colors {a}, {b}")
    if coloring.two_color_degree(y, a, b) >= 2:
        raise ColoringError(f"edge {x}-{y} is not hopeful: {y} has both colors {a}, {b}")
    first = a if coloring.edge_with(y, a) is not None else b
    vertices, edges = walk_alternating(coloring, y, first, a, b)
    if not edges:
        raise AssertionError("hopeful non-happy edge with an empty alternating path")
    if x in vertices:
        return Chain((e, *edges))
    return PathChain((e, *edges), (x, *vertices))


# --- fans -------------------------------------------------------------------

class FanKind(enum.Enum):
    HAPPY = "happy"
    SUCCESSFUL = "successful"
    HOPEFUL_SAME_COLORS = "hopeful_same_colors"


@dataclass(frozen=True)
class FanOutcome:
    kind: FanKind
    fan: Fan
    colors: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.colors is not None and self.colors[0] == self.colors[1]:
            raise ChainError("fan outcome colors must differ")

    def to_json(self) -> dict:
        out = {"outcome": self.kind.value, **self.fan.to_json()}
        if self.colors is not None:
            out["colors"] = list(self.colors)
        return out


def find_happy_fan(coloring: _ColoringOps, x: int, y: int) -> Optional[Fan]:
    """Shortest happy fan with pivot ``x`` starting at the blank edge ``xy``.

    Shifting ``(x y0, ..., x yi)`` keeps the colors at ``x`` and frees only
    ``phi(x yi)``, which is never missing at ``x``; so the fan is happy iff
    ``M(x)`` meets ``M(yi)``.  Shiftability is a reachability condition
    (``phi(x y_{i+1})`` missing at ``y_i``), hence breadth-first search.
    """
    graph = coloring.graph
    mx = coloring.missing_mask(x)
    parent = {y: None}
    queue = deque([y])
    while queue:
        w = queue.popleft()
        mw = coloring.missing_mask(w)
        if mw & mx:
            leaves = []
            while w is not None:
                leaves.append(w)
                w = parent[w]
            return Fan.build(graph, x, reversed(leaves))
        for c in iter_colors(mw & ~mx):
            e = coloring.edge_with(x, c)
            if e is None:
                continue
            z = graph.other(e, x)
            if z not in parent:
                parent[z] = w
                queue.append(z)
    return None


def _grow_fan(coloring: _ColoringOps, x: int, y: int, pick, stop_color: Optional[int] = None):
    """Fan-growing loop shared by the first and second fan procedures.

    ``pick(v)`` gives the chosen missing color at leaf ``v``.  Returns
    ``(leaves, j, last_color)`` where ``j`` is the index of the repeated leaf
    (None when growth stopped on ``stop_color``).
    """
    graph = coloring.graph
    mx = coloring.missing_mask(x)
    leaves = [y]
    position = {y: 0}
    while True:
        c = pick(leaves[-1])
        if (mx >> c) & 1:
            raise AssertionError("fan growth met a happy leaf after the happy-fan search failed")
        if c == stop_color:
            return leaves, None, c
        e = coloring.edge_with(x, c)
        z = graph.other(e, x)
        if z in position:
            return leaves, position[z], c
        position[z] = len(leaves)
        leaves.append(z)


def _pick_successful(coloring: _ColoringOps, x: int, leaves: list[int], j: int,
                     a: int, b: int) -> FanOutcome:
    graph = coloring.graph
    full = Fan.build(graph, x, leaves)
    if is_fan_successful(coloring, full, a, b):
        return FanOutcome(FanKind.SUCCESSFUL, full, (a, b))
    short = full.initial_segment(j)
    if not is_fan_successful(coloring, short, a, b):
        raise AssertionError("neither fan candidate is successful")
    return FanOutcome(FanKind.SUCCESSFUL, short, (a, b))


def first_fan(coloring: _ColoringOps, x: int, y: int) -> FanOutcome:
    """Happy fan at pivot ``x`` from ``xy``, or a fan successful for some color pair."""
    _blank_edge(coloring, x, y)
    happy = find_happy_fan(coloring, x, y)
    if happy is not None:
        return FanOutcome(FanKind.HAPPY, happy)

    def pick(v):
        return lowest_color(coloring.missing_mask(v))

    leaves, j, beta = _grow_fan(coloring, x, y, pick)
    alpha = lowest_color(coloring.missing_mask(x))
    return _pick_successful(coloring, x, leaves, j, alpha, beta)


def second_fan(coloring: _ColoringOps, x: int, y: int, a: int, b: int) -> FanOutcome:
    """Fan at pivot ``x`` from ``xy`` given colors ``a, b`` with exactly one present at ``x``.

    Outcomes: happy; successful for a pair disjoint from ``{a, b}``; or
    hopeful for ``{a, b}`` itself with last leaf other than ``y`` and no fan
    edge colored ``a`` or ``b``.
    """
    _blank_edge(coloring, x, y)
    if a == b:
        raise ColoringError("second fan needs two distinct colors")
    if coloring.two_color_degree(x, a, b) != 1:
        raise ColoringError(f"vertex {x} must carry exactly one of colors {a}, {b}")
    happy = find_happy_fan(coloring, x, y)
    if happy is not None:
        return FanOutcome(FanKind.HAPPY, happy)
    alpha, beta = (a, b) if coloring.is_missing(x, a) else (b, a)
    beta_bit = 1 << beta

    def pick(v):
        mask = coloring.missing_mask(v)
        if v == y:
            mask &= ~beta_bit
        return lowest_color(mask)

    leaves, j, delta = _grow_fan(coloring, x, y, pick, stop_color=beta)
    if j is None:
        return FanOutcome(FanKind.HOPEFUL_SAME_COLORS, Fan.build(coloring.graph, x, leaves),
                          (alpha, beta))
    gamma = lowest_color(coloring.missing_mask(x) & ~(1 << alpha))
    return _pick_successful(coloring, x, leaves, j, gamma, delta)


def single_step_vizing(coloring: _ColoringOps, e: int) -> Chain:
    """Classical Vizing chain (fan plus alternating path) that is happy for ``coloring``."""
    if coloring.color(e) is not BLANK:
        raise ColoringError(f"edge {e} is colored")
    u, v = coloring.graph.edges[e]
    x, y = (u, v) if u < v else (v, u)
    if coloring.common_missing_mask(e):
        return Fan((e,), x, (y,))
    outcome = first_fan(coloring, x, y)
    if outcome.kind is FanKind.HAPPY:
        return outcome.fan
    fan = outcome.fan
    shifted = coloring.fork()
    shift_in_place(shifted, fan.edges, check=False)
    path = alternating_path(shifted, x, fan.vend, *outcome.colors)
    return fan + path


def color_sequentially(graph: Graph, coloring: Optional[PartialColoring] = None,
                       order=None) -> PartialColoring:
    """Extend ``coloring`` to every edge, one Vizing chain per blank edge."""
    coloring = PartialColoring(graph) if coloring is None else coloring
    for e in (range(graph.m) if order is None else order):
        if coloring.color(e) is not BLANK:
            continue
        mask = coloring.common_missing_mask(e)
        if mask:
            coloring.set_color(e, lowest_color(mask))
            continue
        augment_in_place(coloring, single_step_vizing(coloring, e), check=False)
    return coloring
