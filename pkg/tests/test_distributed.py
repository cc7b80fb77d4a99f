import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multivizing.chains import Chain, augment_with_happy_chain, single_step_vizing
from multivizing.distributed import (
    ConflictGraph,
    PhaseCapExceeded,
    RoundLedger,
    SimConfig,
    SimulationStalled,
    apply_phase,
    build_conflict_graph,
    grow_candidates,
    independent_set,
    phase_lower_bound,
    simulate_coloring,
    verify_output,
)
from multivizing.generators import complete, cycle, gnp_capped, petersen
from multivizing.graph_core import BLANK, Graph, PartialColoring
from multivizing.msva import MsvaParams

from instances import oracle_proper, random_graph, random_partial, woven_instances


def chains_on(graph, vertex_paths):
    from multivizing.chains import PathChain
    return {i: PathChain.from_vertices(graph, p) for i, p in enumerate(vertex_paths)}


def brute_conflicts(graph, chains):
    vs = {e: set(c.vertex_set(graph)) for e, c in chains.items()}
    return sorted((e, h) for e, h in itertools.combinations(sorted(chains), 2) if vs[e] & vs[h])


# --- config -------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(phase_cap=0)
    with pytest.raises(ValueError):
        SimConfig(mis="harris")
    with pytest.raises(ValueError):
        SimConfig(rounds="exact")
    with pytest.raises(ValueError):
        SimConfig(epsilon=0)


# --- candidates -----------------------------------------------------------------

def test_all_happy_edges_are_lucky():
    g = cycle(6)
    cands = grow_candidates(PartialColoring(g), range(g.m), MsvaParams(3, 2))
    assert cands.lucky == g.m and all(c.edges == (e,) for e, c in cands.chains.items())


def test_single_uncolored_edge():
    g, col, es = next(woven_instances(1, N=30))
    e = es[0]
    for f in col.uncolored_edges():
        if f != e:
            col = augment_with_happy_chain(col, single_step_vizing(col, f))
    assert col.uncolored_edges() == [e]
    cands = grow_candidates(col, [e], MsvaParams(g.n, 4), seed=3)
    assert list(cands.chains) == [e]
    out = augment_with_happy_chain(col, cands.chains[e])
    assert oracle_proper(g, out.to_list())


def test_candidates_ignore_iteration_order():
    rng = random.Random(4)
    g = random_graph(rng, 80, 5)
    col = random_partial(g, rng, 0.4, swaps=20)
    params = MsvaParams(3, 4)
    blanks = col.uncolored_edges()
    a = grow_candidates(col, blanks, params, seed=9, phase=2)
    b = grow_candidates(col, list(reversed(blanks)), params, seed=9, phase=2)
    assert a.chains == b.chains and a.failures == b.failures


def test_candidate_trace_records_attempts():
    g, col, es = next(woven_instances(1, N=30))
    trace = []
    grow_candidates(col, es, MsvaParams(2, 4), seed=0, phase=5, trace=trace)
    assert [t["edge"] for t in trace] == es
    assert all(t["phase"] == 5 and "outcome" in t and "trace" in t for t in trace)


def test_lucky_fraction_on_empty_coloring():
    g = gnp_capped(2000, 8, 0)
    cands = grow_candidates(PartialColoring(g), range(g.m), MsvaParams.for_graph(g.n, g.delta))
    assert cands.lucky == g.m


# --- conflict graph ---------------------------------------------------------------

def test_conflict_graph_examples():
    g = Graph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    disjoint = chains_on(g, [[0, 1, 2], [3, 4, 5]])
    assert build_conflict_graph(g, disjoint).edges() == []
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    touching = chains_on(g, [[0, 1, 2], [2, 3, 4]])
    assert build_conflict_graph(g, touching).edges() == [(0, 1)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_conflict_graph_matches_pairwise_scan(seed):
    rng = random.Random(seed)
    g = random_graph(rng, 40, 5)
    col = random_partial(g, rng, 0.5, swaps=10)
    cands = grow_candidates(col, col.uncolored_edges(), MsvaParams(3, 4), seed=seed)
    gamma = build_conflict_graph(g, cands.chains)
    assert gamma.edges() == brute_conflicts(g, cands.chains)
    for e in gamma.nodes:
        assert e not in gamma.neighbors(e)
        assert all(e in gamma.neighbors(h) for h in gamma.neighbors(e))


# --- independent sets -------------------------------------------------------------

class FakeGamma(ConflictGraph):
    """Conflict graph with prescribed adjacency: each abstract edge gets a private vertex."""

    def __init__(self, nodes, pairs):
        self.nodes = sorted(nodes)
        vsets = {e: [("own", e)] for e in self.nodes}
        for k, (e, h) in enumerate(pairs):
            vsets[e].append(("pair", k))
            vsets[h].append(("pair", k))
        self.vertex_sets = {e: tuple(v) for e, v in vsets.items()}
        self.index = {}
        for e in self.nodes:
            for v in self.vertex_sets[e]:
                self.index.setdefault(v, []).append(e)


@pytest.mark.parametrize("algorithm", ["luby", "greedy"])
def test_mis_examples(algorithm):
    rng = np.random.default_rng(0)
    chosen, rounds = independent_set(FakeGamma(range(5), []), rng, algorithm)
    assert chosen == [0, 1, 2, 3, 4] and rounds == 1
    chosen, _ = independent_set(FakeGamma(range(3), [(0, 1), (1, 2), (0, 2)]), rng, algorithm)
    assert len(chosen) == 1
    assert independent_set(FakeGamma([], []), rng, algorithm) == ([], 0)


def test_greedy_is_lexicographically_first():
    path = FakeGamma(range(5), [(0, 1), (1, 2), (2, 3), (3, 4)])
    chosen, rounds = independent_set(path, None, "greedy")
    assert chosen == [0, 2, 4] and rounds == 3


@pytest.mark.parametrize("algorithm", ["luby", "greedy"])
@pytest.mark.parametrize("seed", range(5))
def test_mis_random_fifty(algorithm, seed):
    rng = random.Random(seed)
    pairs = [p for p in itertools.combinations(range(50), 2) if rng.random() < 0.08]
    gamma = FakeGamma(range(50), pairs)
    chosen, rounds = independent_set(gamma, np.random.default_rng(seed), algorithm)
    adj = {e: set() for e in range(50)}
    for e, h in pairs:
        adj[e].add(h)
        adj[h].add(e)
    s = set(chosen)
    assert all(not (adj[e] & s) for e in s)
    assert all(adj[e] & s for e in range(50) if e not in s)
    assert gamma.is_independent(chosen) and gamma.is_maximal(chosen)
    assert 1 <= rounds <= 50


def test_unknown_mis_algorithm():
    with pytest.raises(ValueError):
        independent_set(FakeGamma([0], []), None, "matching")


# --- application ------------------------------------------------------------------

def test_apply_single_chain_matches_augment():
    g, col, es = next(woven_instances(1, N=30))
    chain = single_step_vizing(col, es[0])
    expected = augment_with_happy_chain(col, chain)
    work = col.copy()
    assert apply_phase(work, [chain]) == 1
    assert work.to_list() == expected.to_list()


def test_apply_two_disjoint_chains():
    g = Graph(4, [(0, 1), (2, 3)])
    col = PartialColoring(g)
    apply_phase(col, [Chain((0,)), Chain((1,))])
    assert col.to_list() == [1, 1] and oracle_proper(g, col.to_list())


def test_apply_rejects_overlapping_chains():
    g = Graph(3, [(0, 1), (1, 2)])
    col = PartialColoring(g)
    with pytest.raises(AssertionError, match="share a vertex"):
        apply_phase(col, [Chain((0,)), Chain((1,))])
    assert col.to_list() == [BLANK, BLANK]


def test_full_phase_decreases_uncolored():
    g = gnp_capped(1000, 6, 1)
    result = simulate_coloring(g, SimConfig(seed=1))
    first = result.phases[0]
    assert first.uncolored_after < first.uncolored_before == g.m


# --- simulation -----------------------------------------------------------------

def test_k2_one_phase():
    result = simulate_coloring(Graph(2, [(0, 1)]))
    assert len(result.phases) == 1 and result.coloring.to_list() == [1]


def test_petersen_four_colors():
    g = petersen()
    for seed in range(5):
        result = simulate_coloring(g, SimConfig(seed=seed))
        report = verify_output(g, result.coloring)
        assert report.ok and report.colors_used <= 4


@pytest.mark.parametrize("k", [4, 5, 6, 7, 8])
@pytest.mark.parametrize("mis", ["luby", "greedy"])
def test_complete_graphs(k, mis):
    g = complete(k)
    result = simulate_coloring(g, SimConfig(seed=k, mis=mis))
    assert verify_output(g, result.coloring).ok


def check_phase_invariants(graph, result):
    phases = result.phases
    assert phases[0].uncolored_before == graph.m and phases[-1].uncolored_after == 0
    for prev, cur in zip(phases, phases[1:]):
        assert cur.uncolored_before == prev.uncolored_after
    for p in phases:
        assert p.uncolored_after < p.uncolored_before
        assert p.uncolored_before - p.uncolored_after == p.independent_set + p.fallback
        assert p.independent_set <= p.lucky
        assert p.lucky + p.failures == p.uncolored_before
    ledger = result.ledger
    assert ledger.phases == len(phases)
    assert ledger.total == sum(p.rounds for p in phases)
    parts = ledger.chain_growth + ledger.conflict_detection + ledger.independent_set + ledger.augmentation
    assert ledger.total == parts == ledger.to_json()["total"]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 80), st.integers(2, 8), st.sampled_from(["luby", "greedy"]))
def test_simulation_properties(seed, n, d, mis):
    g = random_graph(random.Random(seed), n, d)
    result = simulate_coloring(g, SimConfig(seed=seed, mis=mis, ell=2, steps=3))
    assert verify_output(g, result.coloring).ok
    if g.m:
        check_phase_invariants(g, result)
    params = result.params
    bound = params.length_bound(g.delta)
    assert all(p.max_chain_length <= bound for p in result.phases if not p.fallback)


def test_stalled_phase_forces_fallback():
    g, col, es = next(woven_instances(1, N=30))
    result = simulate_coloring(g, SimConfig(ell=1, steps=1, seed=0), coloring=col)
    assert verify_output(g, result.coloring).ok
    forced = [p for p in result.phases if p.fallback]
    assert forced and all(p.independent_set == 0 and p.lucky == 0 for p in forced)
    assert result.fallback_count == len(forced)


def test_stall_without_fallback_raises():
    g, col, es = next(woven_instances(1, N=30))
    with pytest.raises(SimulationStalled):
        simulate_coloring(g, SimConfig(ell=1, steps=1, fallback=False), coloring=col)


def test_phase_cap():
    g = complete(8)
    with pytest.raises(PhaseCapExceeded, match="after 1 phases"):
        simulate_coloring(g, SimConfig(phase_cap=1))


def test_round_ledger_modes():
    g = gnp_capped(300, 5, 2)
    bound = simulate_coloring(g, SimConfig(seed=2))
    observed = simulate_coloring(g, SimConfig(seed=2, rounds="observed"))
    assert bound.coloring == observed.coloring
    radius = bound.params.length_bound(g.delta)
    assert bound.ledger.chain_growth == radius * len(bound.phases)
    assert bound.ledger.conflict_detection == 2 * bound.ledger.chain_growth
    assert observed.ledger.total < bound.ledger.total
    assert observed.ledger.chain_growth == sum(p.max_chain_length for p in observed.phases)


def test_ledger_charge_arithmetic():
    ledger = RoundLedger()
    assert ledger.charge(10, 3, 12) == 10 + 20 + 3 + 12
    assert ledger.total == 45 and ledger.phases == 1


def test_phase_lower_bound_values():
    assert phase_lower_bound(0, 100, 3) == 0
    assert phase_lower_bound(4**10, 2, 3) == pytest.approx(1 / np.log(2) ** 2)


def test_determinism():
    g = gnp_capped(500, 7, 3)
    a = simulate_coloring(g, SimConfig(seed=5))
    b = simulate_coloring(g, SimConfig(seed=5))
    assert a.coloring.to_list() == b.coloring.to_list()
    assert [p.to_json() for p in a.phases] == [p.to_json() for p in b.phases]
    assert "wall_time" not in a.phases[0].to_json() and "wall_time" in a.phases[0].to_json(True)


def test_phase_counts_grow_slowly():
    counts = [len(simulate_coloring(gnp_capped(2 ** k, 8, 0), SimConfig(seed=0)).phases)
              for k in range(8, 13)]
    # sixteenfold more vertices, far less than sixteenfold more phases
    assert counts[-1] <= 3 * counts[0]


# --- verification ------------------------------------------------------------------

def test_verify_output_examples():
    g = Graph(3, [(0, 1), (1, 2), (2, 0)])
    good = verify_output(g, [1, 2, 3])
    assert good.ok and good.first_problem() is None and good.colors_used == 3
    clash = verify_output(g, [1, 1, 3])
    assert not clash.ok and clash.clash == (0, 1) and "edges 0 and 1" in clash.first_problem()
    missing = verify_output(g, [1, 2, BLANK])
    assert missing.uncolored == [2] and "edge 2" in missing.first_problem()
    over = verify_output(g, [1, 2, 4])
    assert not over.palette_ok and over.out_of_palette == [2]
    with pytest.raises(ValueError):
        verify_output(g, [1, 2])
