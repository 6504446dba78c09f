"""Reference algorithms written as strategies."""

from __future__ import annotations

import math

import numpy as np

from .core import all_edges
from .machine import (
    EDGE_ONLY,
    RELAX,
    YES,
    DQuery,
    EdgeQuery,
    Relax,
    Strategy,
    default_budget,
)


def yen_sequence(order) -> list[tuple[int, int]]:
    """One pass-pair of Yen's scheme over a vertex order.

    Forward pass: for each vertex in order, its edges to later vertices.
    Backward pass: for each vertex in reverse order, its edges to earlier ones.
    """
    pos = {v: i for i, v in enumerate(order)}
    fwd = [(u, v) for u in order for v in order if pos[v] > pos[u]]
    bwd = [(u, v) for u in reversed(order) for v in reversed(order) if pos[v] < pos[u]]
    return fwd + bwd


def yen_pass_pairs(n: int) -> int:
    return -(-n // 2) + 1


class BellmanFord(Strategy):
    """n-1 rounds over all edges in lexicographic order, no queries."""

    name = "bellman-ford"
    kinds = frozenset({RELAX})

    def program(self):
        edges = list(all_edges(self.n))
        for _ in range(self.n - 1):
            for u, v in edges:
                yield Relax(u, v)


class Yen(Strategy):
    name = "yen"
    kinds = frozenset({RELAX})

    def vertex_order(self) -> list[int]:
        return list(range(self.n))

    def program(self):
        seq = yen_sequence(self.vertex_order())
        for _ in range(yen_pass_pairs(self.n)):
            for u, v in seq:
                yield Relax(u, v)


class BannisterEppstein(Yen):
    """Yen's scheme over a uniformly random vertex order drawn from ``seed``."""

    name = "bannister-eppstein"

    def vertex_order(self) -> list[int]:
        rng = np.random.default_rng(0 if self.seed is None else self.seed)
        return [int(v) for v in rng.permutation(self.n)]


class DijkstraCmp(Strategy):
    """Dijkstra with a linear selection scan driven by D-queries."""

    name = "dijkstra-cmp"
    kinds = frozenset({RELAX, DQuery.kind})

    def program(self):
        n = self.n
        unsettled = list(range(n))
        while unsettled:
            best = unsettled[0]
            for v in unsettled[1:]:
                if (yield DQuery(v, best)) is YES:
                    best = v
            unsettled.remove(best)
            for v in range(n):
                if v != best:
                    yield Relax(best, v)


class GuardedBF(Strategy):
    """Sweep all edges, query each and relax on "yes"; stop after two clean sweeps."""

    name = "guarded-bf"
    kinds = EDGE_ONLY

    def program(self):
        edges = list(all_edges(self.n))
        clean = 0
        while clean < 2:
            changed = False
            for u, v in edges:
                if (yield EdgeQuery(u, v)) is YES:
                    yield Relax(u, v)
                    changed = True
            clean = 0 if changed else clean + 1


class RandomFair(Strategy):
    """Uniformly random edge, queried or relaxed with equal probability. Never halts."""

    name = "random-fair"
    kinds = EDGE_ONLY

    def budget_hint(self) -> int:
        # about 2 n^3 ln n steps suffice in practice; triple it
        return max(default_budget(self.n), math.ceil(6 * self.n**3 * math.log(self.n)))

    def program(self):
        rng = np.random.default_rng(0 if self.seed is None else self.seed)
        table = []
        for u, v in all_edges(self.n):
            table += [EdgeQuery(u, v), Relax(u, v)]
        m = len(table)
        while True:
            for r in rng.integers(0, m, size=4096).tolist():
                yield table[r]


STRATEGIES = {
    cls.name: cls for cls in (BellmanFord, Yen, BannisterEppstein, DijkstraCmp, GuardedBF, RandomFair)
}


def make_strategy(name: str, n: int, seed=None) -> Strategy:
    try:
        cls = STRATEGIES[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
    return cls(n, seed=seed)


def bellman_ford(n: int) -> Strategy:
    return BellmanFord(n)


def yen(n: int) -> Strategy:
    return Yen(n)


def bannister_eppstein(n: int, seed: int = 0) -> Strategy:
    return BannisterEppstein(n, seed=seed)


def dijkstra_cmp(n: int) -> Strategy:
    return DijkstraCmp(n)


def guarded_bf(n: int) -> Strategy:
    return GuardedBF(n)


def random_fair(n: int, seed: int = 0) -> Strategy:
    return RandomFair(n, seed=seed)
