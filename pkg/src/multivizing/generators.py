"""Reproducible graph families for benchmarks and tests."""
from __future__ import annotations

import itertools

import numpy as np

from .graph_core import Graph


def gnp_capped(n: int, delta: int, seed: int) -> Graph:
    """Erdős–Rényi ``G(n, p)`` with mean degree ``delta``, then degree-capped at ``delta``.

    Edges are visited in a seeded random order and dropped when either
    endpoint already has ``delta`` kept edges.
    """
    if n < 2 or delta < 1:
        return Graph(max(n, 0), [])
    rng = np.random.default_rng([seed, n, delta])
    p = min(1.0, delta / (n - 1))
    pairs = n * (n - 1) // 2
    k = int(rng.binomial(pairs, p))
    idx = np.sort(rng.choice(pairs, size=k, replace=False))
    # invert the row-major index of the strict upper triangle
    i = (n - 2 - np.floor(np.sqrt(-8.0 * idx + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
    j = (idx + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2).astype(np.int64)
    order = rng.permutation(k)
    deg = np.zeros(n, dtype=np.int64)
    kept = []
    for t in order.tolist():
        u, v = int(i[t]), int(j[t])
        if deg[u] < delta and deg[v] < delta:
            deg[u] += 1
            deg[v] += 1
            kept.append((u, v))
    kept.sort()
    return Graph(n, kept)


def complete(k: int) -> Graph:
    return Graph(k, list(itertools.combinations(range(k), 2)))


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def cycle(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])
