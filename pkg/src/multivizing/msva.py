"""Multi-step Vizing chains with randomly truncated alternating paths.

Each attempt grows ``F0 + P0 + F1 + P1 + ...`` from a blank edge: a fan,
then the alternating path after it, cut at a uniformly random position in
``1..ell`` when longer than ``ell``; the cut edge becomes the blank edge of
the next step.  An attempt fails when the new pivot can "see" an earlier
piece of the chain through a two-colored path (the reach sets below), and
gives up after ``steps`` steps.  Success yields a happy chain of length at
most ``steps * (ell + delta)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .chains import (
    Chain,
    FanKind,
    augment_in_place,
    first_fan,
    is_chain_happy,
    second_fan,
    shift_in_place,
    single_step_vizing,
)
from .graph_core import (
    BLANK,
    ColoringError,
    _ColoringOps,
    endpoints_related,
    iter_colors,
    two_color_component,
    walk_alternating,
)


class SubcaseImpossible(AssertionError):
    """A fan came out hopeful but not successful mid-run; signals a bug."""


class MsvaExhausted(RuntimeError):
    pass


# --- parameters -------------------------------------------------------------

def default_ell(n: int, delta: int) -> int:
    """Truncation window ``(delta+1)^6 * floor(ln n)``, kept above ``(delta+1)^3``."""
    k3 = (delta + 1) ** 3
    base = (delta + 1) ** 6 * int(math.floor(math.log(n))) if n > 1 else 0
    return max(base, k3 + 1)


def default_steps(n: int, epsilon: float = 1 / 16) -> int:
    return max(8, int(math.floor(epsilon * math.log(n)))) if n > 1 else 8


def success_lower_bound(n: int, delta: int, ell: int, steps: int) -> Optional[float]:
    """Guaranteed success probability ``1 - n/lam^T - 3T(delta+1)^3/(lam-1)``.

    ``lam = ell / (delta+1)^3``; None when ``lam <= 1`` (no guarantee).
    """
    k3 = (delta + 1) ** 3
    lam = ell / k3
    if lam <= 1:
        return None
    return 1.0 - n / lam ** steps - 3.0 * steps * k3 / (lam - 1.0)


@dataclass(frozen=True)
class MsvaParams:
    ell: int
    steps: int

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError(f"ell must be >= 1, got {self.ell}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @classmethod
    def for_graph(cls, n: int, delta: int, ell: Optional[int] = None,
                  steps: Optional[int] = None, epsilon: float = 1 / 16) -> "MsvaParams":
        return cls(default_ell(n, delta) if ell is None else ell,
                   default_steps(n, epsilon) if steps is None else steps)

    def length_bound(self, delta: int) -> int:
        return self.steps * (self.ell + delta)


# --- reach sets -------------------------------------------------------------

def _pairs_at(coloring: _ColoringOps, z: int):
    """``(first, other)`` color pairs for which ``z`` ends a nontrivial two-colored path."""
    used = coloring.used_mask(z)
    missing = coloring.full_mask & ~used
    for c in iter_colors(used):
        for d in iter_colors(missing):
            yield c, d


def r_out(coloring: _ColoringOps, x: int) -> set[int]:
    """Vertices reachable from ``x``: itself, its neighbors, and every vertex on a
    two-colored path that ends at a neighbor of ``x``."""
    graph = coloring.graph
    out = {x}
    for z, _ in graph.adj[x]:
        out.add(z)
        for c, d in _pairs_at(coloring, z):
            vs, _ = walk_alternating(coloring, z, c, c, d)
            out.update(vs)
    return out


def r_in(coloring: _ColoringOps, y: int) -> set[int]:
    """All ``x`` with ``y`` in ``r_out(x)``.

    Built from the other side: ``y``, its neighbors, and the neighbors of the
    endpoints of every two-colored path through ``y``.
    """
    graph = coloring.graph
    out = {y}
    out.update(w for w, _ in graph.adj[y])
    palette = coloring.palette
    used = coloring.used_mask(y)
    for a in range(1, palette + 1):
        for b in range(a + 1, palette + 1):
            if not ((used >> a) & 1 or (used >> b) & 1):
                continue
            comp = two_color_component(coloring, y, a, b)
            if comp.is_cycle:
                continue
            for z in comp.ends:
                out.update(w for w, _ in graph.adj[z])
    return out


def r_in_chain(coloring: _ColoringOps, chain: Chain) -> set[int]:
    out: set[int] = set()
    for v in chain.vertex_set(coloring.graph):
        out |= r_in(coloring, v)
    return out


def reaches(coloring: _ColoringOps, x: int, targets) -> bool:
    """Whether ``r_out(x)`` meets ``targets`` (i.e. ``x`` is in ``r_in`` of some target).

    Walks stop at the first hit, so this is much cheaper than building the set.
    """
    if x in targets:
        return True
    graph = coloring.graph
    adj = graph.adj[x]
    for z, _ in adj:
        if z in targets:
            return True
    edges = graph.edges
    for z, _ in adj:
        for c, d in _pairs_at(coloring, z):
            v, col = z, c
            while True:
                e = coloring.edge_with(v, col)
                if e is None:
                    break
                a, b = edges[e]
                v = b if a == v else a
                if v in targets:
                    return True
                col = d if col == c else c
    return False


# --- the algorithm ----------------------------------------------------------

class OutcomeKind(enum.Enum):
    SUCCESS_FAN = "success_fan"
    SUCCESS_PATH = "success_path"
    FAIL_INTERSECTION = "fail_intersection"
    STEP_LIMIT = "step_limit"


@dataclass
class StepRecord:
    """What happened on one step (kept only when tracing)."""

    index: int
    x: int
    y: int
    case: str
    fan: Optional[Chain] = None
    fan_kind: Optional[str] = None
    colors: Optional[tuple[int, int]] = None
    q_length: Optional[int] = None
    q_vertices: Optional[tuple[int, ...]] = None
    ell_i: Optional[int] = None
    hit: Optional[tuple[str, int]] = None
    phi: Optional[_ColoringOps] = field(default=None, repr=False)
    psi: Optional[_ColoringOps] = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {"step": self.index, "x": self.x, "y": self.y, "case": self.case}
        if self.fan is not None:
            out["fan_leaves"] = list(self.fan.leaves)
            out["fan_kind"] = self.fan_kind
        if self.colors is not None:
            out["colors"] = list(self.colors)
        if self.q_length is not None:
            out["q_length"] = self.q_length
        if self.ell_i is not None:
            out["ell_i"] = self.ell_i
        if self.case in ("truncated", "fail"):
            out["intersection"] = None if self.hit is None else {"piece": self.hit[0], "step": self.hit[1]}
        return out


@dataclass
class MsvaOutcome:
    kind: OutcomeKind
    steps: int
    chain: Optional[Chain] = None
    hit: Optional[tuple[str, int]] = None
    trace: list[StepRecord] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.kind in (OutcomeKind.SUCCESS_FAN, OutcomeKind.SUCCESS_PATH)

    def to_json(self) -> dict:
        out = {"outcome": self.kind.value, "steps": self.steps}
        if self.chain is not None:
            out["chain"] = list(self.chain.edges)
        if self.hit is not None:
            out["failed_on"] = {"piece": self.hit[0], "step": self.hit[1]}
        if self.trace:
            out["trace"] = [s.to_json() for s in self.trace]
        return out


RngLike = Union[np.random.Generator, int, Sequence[int], None]


class _LazyRng:
    """Defers generator construction until a draw is needed.

    Most attempts never truncate a path, and building a generator per edge
    dominates their cost otherwise.
    """

    def __init__(self, rng: RngLike):
        self._src = rng
        self._gen = rng if isinstance(rng, np.random.Generator) else None

    def integers(self, low: int, high: int) -> int:
        if self._gen is None:
            self._gen = np.random.default_rng(self._src)
        return int(self._gen.integers(low, high))


def run_msva(coloring: _ColoringOps, e: int, params: MsvaParams, rng: RngLike = None,
             trace: bool = False, witness: bool = False,
             reach: Callable[[_ColoringOps, int, set], bool] = reaches) -> MsvaOutcome:
    """One randomized attempt to build a happy chain starting at blank edge ``e``.

    ``coloring`` is never modified.  ``trace`` keeps a record per step;
    ``witness`` also keeps the colorings ``phi_i`` and ``psi_i`` needed by
    :func:`backtrack_witness_check`.  ``reach`` is the intersection test used
    for the failure condition; tests swap it for fault injection.
    """
    trace = trace or witness
    if coloring.color(e) is not BLANK:
        raise ColoringError(f"edge {e} is colored")
    graph = coloring.graph
    draw = _LazyRng(rng)
    ell = params.ell
    phi = coloring.fork()
    u, v = graph.edges[e]
    x, y = (u, v) if u < v else (v, u)
    chain: list[int] = []
    prev: Optional[tuple[int, int]] = None
    history: list[tuple[str, int, set, _ColoringOps]] = []
    records: list[StepRecord] = []

    for i in range(params.steps):
        rec = StepRecord(i, x, y, "") if trace else None
        if witness:
            rec.phi = phi.snapshot()
        if i == 0:
            out = first_fan(phi, x, y)
        else:
            out = second_fan(phi, x, y, *prev)
        fan = out.fan
        if trace:
            rec.fan, rec.fan_kind = fan, out.kind.value
        if out.kind is FanKind.HAPPY:
            chain.extend(fan.edges[1:] if chain else fan.edges)
            if trace:
                rec.case = "happy_fan"
                records.append(rec)
            return MsvaOutcome(OutcomeKind.SUCCESS_FAN, i, Chain(tuple(chain)), trace=records)

        a, b = out.colors
        z = fan.vend
        shift_in_place(phi, fan.edges, check=False)
        if endpoints_related(phi, x, z, a, b):
            raise SubcaseImpossible(
                f"step {i}: fan at {x} ending at {z} is hopeful but not successful for {a}/{b}")
        first = a if phi.edge_with(z, a) is not None else b
        limit = None if trace else ell
        verts, path = walk_alternating(phi, z, first, a, b, limit=limit)
        q_length = 1 + len(path)
        if trace:
            rec.colors, rec.q_length, rec.q_vertices = (a, b), q_length, (x, *verts)
            if witness:
                rec.psi = phi.snapshot()
        xz = fan.edges[-1]
        chain.extend(fan.edges[1:] if chain else fan.edges)

        if q_length <= ell:
            chain.extend(path)
            if trace:
                rec.case = "successful_path"
                records.append(rec)
            return MsvaOutcome(OutcomeKind.SUCCESS_PATH, i, Chain(tuple(chain)), trace=records)

        ell_i = draw.integers(1, ell + 1)
        x_next, y_next = verts[ell_i - 1], verts[ell_i]
        truncated = [xz, *path[:ell_i]]
        psi = phi.snapshot()
        history.append(("fan", i, {x, *fan.leaves}, psi))
        hit = None
        for piece, j, vs, snap in history:
            if reach(snap, x_next, vs):
                hit = (piece, j)
                break
        if trace:
            rec.ell_i = ell_i
            rec.hit = hit
            rec.case = "fail" if hit else "truncated"
            records.append(rec)
        if hit is not None:
            return MsvaOutcome(OutcomeKind.FAIL_INTERSECTION, i, hit=hit, trace=records)
        history.append(("path", i, {x, *verts[: ell_i + 1]}, psi))
        shift_in_place(phi, truncated, check=False)
        chain.extend(truncated[1:])
        assert phi.two_color_degree(x_next, a, b) == 1
        prev = (a, b)
        x, y = x_next, y_next

    return MsvaOutcome(OutcomeKind.STEP_LIMIT, params.steps, trace=records)


@dataclass
class AugmentingChain:
    chain: Chain
    attempts: int
    fallback: bool


def find_augmenting_chain(coloring: _ColoringOps, e: int, params: MsvaParams,
                          rng: RngLike = None, max_retries: int = 32,
                          fallback: bool = True) -> AugmentingChain:
    """Retry :func:`run_msva` until it succeeds, then fall back to a plain Vizing chain."""
    if coloring.color(e) is not BLANK:
        raise ColoringError(f"edge {e} is colored")
    if coloring.common_missing_mask(e):
        return AugmentingChain(Chain((e,)), 0, False)
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    for attempt in range(1, max_retries + 1):
        out = run_msva(coloring, e, params, gen)
        if out.success:
            return AugmentingChain(out.chain, attempt, False)
    if not fallback:
        raise MsvaExhausted(f"no happy chain for edge {e} after {max_retries} attempts")
    return AugmentingChain(single_step_vizing(coloring, e), max_retries, True)


def color_with_msva(coloring: _ColoringOps, params: MsvaParams, rng: RngLike = None,
                    max_retries: int = 32, fallback: bool = True, order=None) -> int:
    """Color every blank edge in turn with multi-step chains; returns fallback count."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    fallbacks = 0
    for e in (range(coloring.graph.m) if order is None else order):
        if coloring.color(e) is not BLANK:
            continue
        found = find_augmenting_chain(coloring, e, params, gen, max_retries, fallback)
        fallbacks += found.fallback
        augment_in_place(coloring, found.chain, check=False)
    return fallbacks


# --- test oracle ------------------------------------------------------------

@dataclass
class WitnessReport:
    ok: bool
    violation: Optional[tuple[int, int, int, str]] = None


def backtrack_witness_check(trace: list[StepRecord],
                            forward: Callable[[_ColoringOps, int], set] = r_out) -> WitnessReport:
    """Every pivot ``x_i`` reaches all of its alternating path in every earlier coloring.

    For each step ``i`` that built a non-happy fan and each ``u`` on the full
    path ``Q_i``, checks ``u in r_out(x_i, phi_j)`` and ``u in r_out(x_i, psi_j)``
    for all ``j <= i``.  Returns the first violating ``(i, j, u, which)``.
    """
    if any(rec.phi is None for rec in trace):
        raise ValueError("trace was recorded without witness snapshots")
    for rec in trace:
        if rec.q_vertices is None:
            continue
        q = set(rec.q_vertices)
        for j in range(rec.index + 1):
            earlier = trace[j]
            for which, col in (("phi", earlier.phi), ("psi", earlier.psi)):
                if col is None:
                    continue
                missing = q - forward(col, rec.x)
                if missing:
                    return WitnessReport(False, (rec.index, j, min(missing), which))
    return WitnessReport(True)


def verify_outcome(coloring: _ColoringOps, e: int, outcome: MsvaOutcome) -> bool:
    """Independent re-check that a successful outcome is a happy chain from ``e``."""
    if not outcome.success:
        return False
    chain = outcome.chain
    return chain.start == e and is_chain_happy(coloring, chain)
