"""Phase-based simulation of the distributed coloring loop.

Every phase freezes the current coloring and, for each uncolored edge,
independently tries to grow a happy multi-step chain (the edge is *lucky*
when this succeeds).  Chains whose vertex sets intersect conflict; a maximal
independent set of the conflict graph is augmented in parallel, which is
safe because the chosen chains touch pairwise disjoint vertex sets.

Communication is not emulated.  Instead a :class:`RoundLedger` charges each
phase a synthetic number of LOCAL rounds.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

import numpy as np

from .chains import Chain, augment_in_place, single_step_vizing
from .graph_core import BLANK, Graph, PartialColoring, _ColoringOps
from .msva import MsvaParams, run_msva

MIS_ALGORITHMS = ("luby", "greedy")
ROUND_MODES = ("bound", "observed")


class PhaseCapExceeded(RuntimeError):
    pass


class SimulationStalled(RuntimeError):
    """A phase made no progress and the straggler fallback is disabled."""


@dataclass(frozen=True)
class SimConfig:
    ell: Optional[int] = None
    steps: Optional[int] = None
    epsilon: float = 1 / 16
    mis: str = "luby"
    phase_cap: Optional[int] = None
    seed: int = 0
    fallback: bool = True
    rounds: str = "bound"

    def __post_init__(self):
        if self.mis not in MIS_ALGORITHMS:
            raise ValueError(f"unknown independent-set algorithm {self.mis!r}")
        if self.rounds not in ROUND_MODES:
            raise ValueError(f"unknown round-accounting mode {self.rounds!r}")
        if self.phase_cap is not None and self.phase_cap < 1:
            raise ValueError("phase cap must be at least 1")
        if not 0 < self.epsilon:
            raise ValueError("epsilon must be positive")

    def params_for(self, graph: Graph) -> MsvaParams:
        return MsvaParams.for_graph(graph.n, graph.delta, self.ell, self.steps, self.epsilon)


# --- candidates -------------------------------------------------------------

@dataclass
class Candidates:
    chains: dict[int, Chain]
    attempted: int
    failures: dict[str, int] = field(default_factory=dict)

    @property
    def lucky(self) -> int:
        return len(self.chains)


def grow_candidates(coloring: _ColoringOps, edges: Iterable[int], params: MsvaParams,
                    seed: int = 0, phase: int = 0, trace: Optional[list] = None) -> Candidates:
    """Run one attempt per uncolored edge against the same frozen coloring.

    The attempt for edge ``e`` draws from its own stream seeded by
    ``(seed, phase, e)``, so results do not depend on iteration order.
    Attempts on non-happy edges are appended to ``trace`` when given.
    """
    chains: dict[int, Chain] = {}
    failures: dict[str, int] = {}
    attempted = 0
    common = coloring.common_missing_mask
    for e in edges:
        attempted += 1
        if common(e):
            chains[e] = Chain((e,))
            continue
        out = run_msva(coloring, e, params, rng=[seed, phase, e], trace=trace is not None)
        if trace is not None:
            trace.append({"phase": phase, "edge": e, **out.to_json()})
        if out.success:
            chains[e] = out.chain
        else:
            failures[out.kind.value] = failures.get(out.kind.value, 0) + 1
    return Candidates(chains, attempted, failures)


# --- conflict graph ---------------------------------------------------------

class ConflictGraph:
    """Candidates joined when their vertex sets meet, stored as an inverted index."""

    def __init__(self, graph: Graph, chains: dict[int, Chain]):
        self.nodes: list[int] = sorted(chains)
        ends = graph.edges
        self.vertex_sets: dict[int, tuple[int, ...]] = {
            e: ends[e] if len(chains[e].edges) == 1 else tuple(sorted(chains[e].vertex_set(graph)))
            for e in self.nodes}
        index: dict[int, list[int]] = {}
        for e in self.nodes:
            for v in self.vertex_sets[e]:
                index.setdefault(v, []).append(e)
        self.index = index

    def __len__(self) -> int:
        return len(self.nodes)

    def neighbors(self, e: int) -> set[int]:
        out: set[int] = set()
        for v in self.vertex_sets[e]:
            out.update(self.index[v])
        out.discard(e)
        return out

    def edges(self) -> list[tuple[int, int]]:
        return sorted((e, h) for e in self.nodes for h in self.neighbors(e) if e < h)

    def is_independent(self, chosen: Iterable[int]) -> bool:
        seen: set[int] = set()
        for e in chosen:
            vs = self.vertex_sets[e]
            if seen.intersection(vs):
                return False
            seen.update(vs)
        return True

    def is_maximal(self, chosen: Iterable[int]) -> bool:
        covered: set[int] = set()
        chosen = set(chosen)
        for e in chosen:
            covered.update(self.vertex_sets[e])
        return all(e in chosen or covered.intersection(self.vertex_sets[e]) for e in self.nodes)


def build_conflict_graph(graph: Graph, chains: dict[int, Chain]) -> ConflictGraph:
    return ConflictGraph(graph, chains)


def _local_minima_mis(gamma: ConflictGraph, priority) -> tuple[list[int], int]:
    """Parallel local-minimum MIS: each round, every active node whose priority
    beats all active neighbors joins, then it and its neighbors retire."""
    active = list(gamma.nodes)
    vsets = gamma.vertex_sets
    chosen: list[int] = []
    rounds = 0
    while active:
        rounds += 1
        pri = priority(active)
        best: dict[int, float] = {}
        for e in active:
            p = pri[e]
            for v in vsets[e]:
                if p < best.get(v, math.inf):
                    best[v] = p
        winners = [e for e in active if all(best[v] == pri[e] for v in vsets[e])]
        covered = set()
        for e in winners:
            covered.update(vsets[e])
        chosen.extend(winners)
        active = [e for e in active if covered.isdisjoint(vsets[e])]
    return sorted(chosen), rounds


def _greedy_by_id(gamma: ConflictGraph) -> tuple[list[int], int]:
    """Lexicographically first MIS, with the round count of its parallel execution.

    A node is decided one round after its last smaller neighbor retires, or in
    the same round as its first smaller neighbor that joins.
    """
    joined: dict[int, int] = {}
    retired: dict[int, int] = {}
    for e in gamma.nodes:
        smaller = [h for h in gamma.neighbors(e) if h < e]
        hits = [joined[h] for h in smaller if h in joined]
        if hits:
            retired[e] = min(hits)
        else:
            joined[e] = 1 + max((retired.get(h, joined.get(h, 0)) for h in smaller), default=0)
    rounds = max(list(joined.values()) + list(retired.values()), default=0)
    return sorted(joined), rounds


def independent_set(gamma: ConflictGraph, rng: Optional[np.random.Generator] = None,
                    algorithm: str = "luby") -> tuple[list[int], int]:
    """Maximal independent set of ``gamma`` and the number of rounds it took."""
    if algorithm == "greedy":
        return _greedy_by_id(gamma)
    if algorithm != "luby":
        raise ValueError(f"unknown independent-set algorithm {algorithm!r}")
    rng = np.random.default_rng() if rng is None else rng

    def fresh(active):
        ranks = rng.permutation(len(active))
        return dict(zip(active, ranks.tolist()))

    return _local_minima_mis(gamma, fresh)


# --- application ------------------------------------------------------------

def _check_vertices(coloring: _ColoringOps, vertices: Iterable[int]) -> None:
    adj = coloring.graph.adj
    color = coloring.color
    for v in vertices:
        cs = [color(e) for _, e in adj[v]]
        cs = [c for c in cs if c is not BLANK]
        if len(set(cs)) != len(cs):
            raise AssertionError(f"a color repeats at vertex {v} after augmentation")


def apply_phase(coloring: PartialColoring, chains: list[Chain]) -> int:
    """Augment along vertex-disjoint happy chains in place; returns how many were applied."""
    graph = coloring.graph
    seen: set[int] = set()
    vsets = []
    for chain in chains:
        vs = graph.edges[chain.start] if len(chain.edges) == 1 else chain.vertex_set(graph)
        if not seen.isdisjoint(vs):
            raise AssertionError("chains applied in one phase share a vertex")
        seen.update(vs)
        vsets.append(vs)
    before = coloring.colored_count()
    for chain, vs in zip(chains, vsets):
        augment_in_place(coloring, chain)
        _check_vertices(coloring, vs)
    if coloring.colored_count() != before + len(chains):
        raise AssertionError("phase did not color exactly one edge per chain")
    return len(chains)


# --- bookkeeping ------------------------------------------------------------

@dataclass
class PhaseStats:
    phase: int
    uncolored_before: int
    uncolored_after: int
    lucky: int
    failures: int
    independent_set: int
    fallback: int
    mis_rounds: int
    rounds: int
    max_chain_length: int
    mean_chain_length: float
    wall_time: float = 0.0

    def to_json(self, timing: bool = False) -> dict:
        out = asdict(self)
        if not timing:
            del out["wall_time"]
        return out


@dataclass
class RoundLedger:
    mode: str = "bound"
    chain_growth: int = 0
    conflict_detection: int = 0
    independent_set: int = 0
    augmentation: int = 0
    phases: int = 0

    @property
    def total(self) -> int:
        return self.chain_growth + self.conflict_detection + self.independent_set + self.augmentation

    def charge(self, radius: int, mis_rounds: int, augment: int) -> int:
        self.phases += 1
        self.chain_growth += radius
        self.conflict_detection += 2 * radius
        self.independent_set += mis_rounds
        self.augmentation += augment
        return radius + 2 * radius + mis_rounds + augment

    def to_json(self) -> dict:
        return {**asdict(self), "total": self.total}


def phase_lower_bound(uncolored: int, n: int, delta: int) -> float:
    """Guaranteed independent-set size ``|U| / ((delta+1)^10 (ln n)^2)`` for one phase."""
    log = math.log(n) if n > 1 else 1.0
    return uncolored / ((delta + 1) ** 10 * log * log)


@dataclass
class SimulationResult:
    coloring: PartialColoring
    phases: list[PhaseStats]
    ledger: RoundLedger
    params: MsvaParams

    @property
    def fallback_count(self) -> int:
        return sum(p.fallback for p in self.phases)


def simulate_coloring(graph: Graph, config: SimConfig = SimConfig(),
                      coloring: Optional[PartialColoring] = None,
                      trace: Optional[list] = None) -> SimulationResult:
    """Run phases until every edge is colored."""
    coloring = PartialColoring(graph) if coloring is None else coloring
    params = config.params_for(graph)
    cap = config.phase_cap if config.phase_cap is not None else max(graph.m, 1)
    ledger = RoundLedger(config.rounds)
    bound_radius = params.length_bound(graph.delta)
    uncolored = coloring.uncolored_edges()
    phases: list[PhaseStats] = []
    while uncolored:
        index = len(phases)
        if index >= cap:
            raise PhaseCapExceeded(
                f"{len(uncolored)} edges still uncolored after {cap} phases")
        started = time.perf_counter()
        cands = grow_candidates(coloring, uncolored, params, config.seed, index, trace)
        gamma = build_conflict_graph(graph, cands.chains)
        mis_rng = np.random.default_rng([config.seed, index, graph.m])
        chosen, mis_rounds = independent_set(gamma, mis_rng, config.mis)
        applied = [cands.chains[e] for e in chosen]
        apply_phase(coloring, applied)
        forced = 0
        forced_length = 0
        if not applied:
            if not config.fallback:
                raise SimulationStalled(
                    f"phase {index}: no lucky edge among {len(uncolored)} uncolored")
            chain = single_step_vizing(coloring, uncolored[0])
            augment_in_place(coloring, chain)
            forced, forced_length = 1, chain.length
        lengths = [c.length for c in cands.chains.values()]
        if config.rounds == "bound":
            radius = bound_radius
        else:
            radius = max(lengths, default=0)
        charged = ledger.charge(radius, mis_rounds, radius + forced_length)
        after = [e for e in uncolored if coloring.color(e) is BLANK]
        phases.append(PhaseStats(
            phase=index,
            uncolored_before=len(uncolored),
            uncolored_after=len(after),
            lucky=cands.lucky,
            failures=cands.attempted - cands.lucky,
            independent_set=len(chosen),
            fallback=forced,
            mis_rounds=mis_rounds,
            rounds=charged,
            max_chain_length=max(lengths, default=0),
            mean_chain_length=round(sum(lengths) / len(lengths), 6) if lengths else 0.0,
            wall_time=time.perf_counter() - started,
        ))
        uncolored = after
    return SimulationResult(coloring, phases, ledger, params)


# --- verification -----------------------------------------------------------

@dataclass
class VerificationReport:
    total: bool
    proper: bool
    palette_ok: bool
    colors_used: int
    palette: int
    uncolored: list[int] = field(default_factory=list)
    clash: Optional[tuple[int, int]] = None
    out_of_palette: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.total and self.proper and self.palette_ok

    def first_problem(self) -> Optional[str]:
        if self.clash is not None:
            return f"edges {self.clash[0]} and {self.clash[1]} share an endpoint and a color"
        if self.out_of_palette:
            return f"edge {self.out_of_palette[0]} uses a color above {self.palette}"
        if self.uncolored:
            return f"edge {self.uncolored[0]} is uncolored"
        return None

    def to_json(self) -> dict:
        out = asdict(self)
        out["ok"] = self.ok
        out["uncolored"] = self.uncolored[:20]
        out["out_of_palette"] = self.out_of_palette[:20]
        return out


def verify_output(graph: Graph, colors) -> VerificationReport:
    """Check totality, properness and the ``delta + 1`` palette from raw per-edge colors.

    ``colors`` is a coloring object or a plain sequence indexed by edge id;
    nothing is trusted from cached per-vertex state.
    """
    if isinstance(colors, _ColoringOps):
        colors = colors.to_list()
    colors = list(colors)
    if len(colors) != graph.m:
        raise ValueError(f"expected {graph.m} colors, got {len(colors)}")
    palette = graph.delta + 1
    uncolored = [e for e, c in enumerate(colors) if c is BLANK]
    bad = [e for e, c in enumerate(colors) if c is not BLANK and not 1 <= c <= palette]
    clash = None
    for v in range(graph.n):
        seen: dict[int, int] = {}
        for _, e in graph.adj[v]:
            c = colors[e]
            if c is BLANK:
                continue
            if c in seen:
                pair = (min(seen[c], e), max(seen[c], e))
                if clash is None or pair < clash:
                    clash = pair
            else:
                seen[c] = e
    used = len({c for c in colors if c is not BLANK})
    return VerificationReport(not uncolored, clash is None, not bad, used, palette,
                              uncolored, clash, bad)
