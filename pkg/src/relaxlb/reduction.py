"""Masking D-queries and weight queries away with a Golomb-ruler potential.

With ``l' = l + c * delta(phi)``, ``c = 2 * lmax * n + 1`` and ``phi`` a
Golomb-ruler potential, the order of the masked weights equals the order of
``delta(phi)`` and any two path lengths from a common start compare like the
potentials of their endpoints.  A strategy run on ``l'`` therefore gets
answers to its D-queries and weight queries that do not depend on ``l`` at
all, and :class:`Masked` answers them itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .adversary import DuelResult, duel
from .core import Potential, WeightAssignment, combine
from .golomb import golomb_potential, is_golomb
from .machine import (
    DQ,
    EDGE_ONLY,
    NO,
    WQ,
    YES,
    ConcreteEnvironment,
    ModelViolation,
    Strategy,
    default_budget,
    validate_operation,
)


def mask_constant(lmax: int, n: int) -> int:
    return 2 * lmax * n + 1


@dataclass(frozen=True)
class MaskParams:
    phi: Potential
    c: int

    def __post_init__(self):
        if not is_golomb(self.phi.phi):
            raise ValueError("mask potential must be a Golomb ruler (distinct differences)")

    @classmethod
    def for_lmax(cls, n: int, lmax: int) -> "MaskParams":
        return cls(golomb_potential(n), mask_constant(lmax, n))

    def mask(self, l: WeightAssignment) -> WeightAssignment:
        return combine(l, self.phi, self.c)

    def to_document(self) -> dict:
        return {"phi": list(self.phi.phi), "c": self.c}


class Masked(Strategy):
    """``inner`` with its D-queries and weight queries answered from ``phi``."""

    name = "masked"
    kinds = EDGE_ONLY

    def __init__(self, inner: Strategy, params: MaskParams):
        super().__init__(inner.n, s=inner.s, seed=inner.seed)
        if params.phi.n != inner.n:
            raise ValueError("potential size does not match the strategy")
        self.inner = inner
        self.params = params
        self.kinds = inner.kinds & EDGE_ONLY
        self.name = f"masked-{inner.name}"
        self.spliced = 0

    def budget_hint(self):
        return self.inner.budget_hint()

    def fresh(self) -> "Masked":
        return Masked(self.inner.fresh(), self.params)

    def program(self):
        phi = self.params.phi.phi
        inner = self.inner.operations
        try:
            op = inner.send(None)
            while True:
                if op.kind == DQ:
                    ans = YES if phi[op.u] < phi[op.v] else NO
                    self.spliced += 1
                elif op.kind == WQ:
                    ans = YES if phi[op.v] - phi[op.u] < phi[op.y] - phi[op.x] else NO
                    self.spliced += 1
                else:
                    ans = yield op
                op = inner.send(ans)
        except StopIteration:
            return


def wrap(a: Strategy, params: MaskParams) -> Masked:
    return Masked(a, params)


def _edge_vectors(l: WeightAssignment, phi: Potential, c: int):
    n = l.n
    off = ~np.eye(n, dtype=bool)
    p = np.array(phi.phi, dtype=object)
    dphi = (p[None, :] - p[:, None])[off]
    masked = (np.array(l.weights, dtype=object) + c * (p[None, :] - p[:, None]))[off]
    return masked, dphi


def verify_p1(l: WeightAssignment, params: MaskParams) -> bool:
    """Weight order of the masked assignment equals the order of ``delta(phi)``, over all edge pairs."""
    masked, dphi = _edge_vectors(l, params.phi, params.c)
    a = np.sign((masked[:, None] - masked[None, :]).astype(np.int64))
    b = np.sign((dphi[:, None] - dphi[None, :]).astype(np.int64))
    return bool(np.array_equal(a < 0, b < 0))


def simple_paths_from(l: WeightAssignment, u: int):
    """Yield ``(end, length)`` for every simple path starting at ``u``, the trivial one included."""
    n, w = l.n, l.weights
    on = [False] * n
    on[u] = True
    stack = [(u, 0, iter(range(n)))]
    yield u, 0
    while stack:
        cur, length, it = stack[-1]
        for v in it:
            if not on[v]:
                on[v] = True
                nl = length + w[cur][v]
                yield v, nl
                stack.append((v, nl, iter(range(n))))
                break
        else:
            stack.pop()
            on[cur] = False


def _p2_exhaustive(lp: WeightAssignment, phi) -> bool:
    # pairwise check collapses to: endpoint groups ordered by phi have
    # disjoint, correspondingly ordered length ranges
    n = lp.n
    order = sorted(range(n), key=lambda v: phi[v])
    for u in range(n):
        lo = [None] * n
        hi = [None] * n
        for end, length in simple_paths_from(lp, u):
            if lo[end] is None or length < lo[end]:
                lo[end] = length
            if hi[end] is None or length > hi[end]:
                hi[end] = length
        for a, b in zip(order, order[1:]):
            if not hi[a] < lo[b]:
                return False
    return True


def _random_simple_path(n: int, u: int, rng) -> list[int]:
    others = [v for v in range(n) if v != u]
    k = int(rng.integers(0, n))
    return [u] + [others[i] for i in rng.permutation(len(others))[:k]]


def verify_p2(l: WeightAssignment, params: MaskParams, path_budget: int = 10_000, seed: int = 0) -> bool:
    """Path lengths from a common start compare like ``phi`` of their endpoints.

    Exhaustive over all simple paths for n <= 7, otherwise ``path_budget``
    random pairs with distinct endpoints.
    """
    lp = params.mask(l)
    phi = params.phi.phi
    n = l.n
    if n <= 7:
        return _p2_exhaustive(lp, phi)
    rng = np.random.default_rng(seed)
    checked = 0
    while checked < path_budget:
        u = int(rng.integers(n))
        px, py = _random_simple_path(n, u, rng), _random_simple_path(n, u, rng)
        x, y = px[-1], py[-1]
        if x == y:
            continue
        if (lp.path_length(px) < lp.path_length(py)) != (phi[x] < phi[y]):
            return False
        checked += 1
    return True


def check_potential_oblivious(
    s: Strategy, l: WeightAssignment, phi: Potential, budget: Optional[int] = None
) -> bool:
    """Run fresh copies of ``s`` on ``l`` and on ``l + delta(phi)`` in lockstep.

    True iff both emit the same operations, get the same answers, and
    ``D'[v] = D[v] + phi[v]`` holds after every step.
    """
    if s.kinds - EDGE_ONLY:
        raise ModelViolation(f"{s!r} is not restricted to edge queries and relaxations")
    n = l.n
    budget = default_budget(n) if budget is None else budget
    shifted = combine(l, phi, 1)
    a, b = s.fresh(), s.fresh()
    env_a, env_b = ConcreteEnvironment(l), ConcreteEnvironment(shifted)
    da, db = env_a.state.d, env_b.state.d
    p = phi.phi
    if any(db[v] != da[v] + p[v] for v in range(n)):
        return False
    ans_a = ans_b = None
    for _ in range(budget):
        op_a, op_b = a.next(ans_a), b.next(ans_b)
        if op_a != op_b:
            return False
        if op_a is None:
            return True
        if op_a.kind not in s.kinds:
            raise ModelViolation(f"{s!r} emitted undeclared {op_a}")
        validate_operation(op_a, n)
        ans_a, ans_b = env_a.answer(op_a), env_b.answer(op_b)
        if ans_a is not ans_b:
            return False
        v = op_a.v
        if db[v] != da[v] + p[v]:
            return False
    return True


@dataclass
class DemoResult:
    duel: DuelResult
    params: MaskParams
    classification: str  # "meets-bound", "below-bound" or "incorrect-halt"


def theorem2_demo(a: Strategy, n: Optional[int] = None, budget: Optional[int] = None) -> DemoResult:
    """Mask ``a`` for the hard family (lmax = L = 5n) and play it against the adversary."""
    n = a.n if n is None else n
    L = 5 * n
    params = MaskParams.for_lmax(n, L)
    result = duel(wrap(a, params), n, L, budget)
    if not result.correct:
        label = "incorrect-halt"
    elif result.total_ops >= result.lower_bound:
        label = "meets-bound"
    else:
        label = "below-bound"
    return DemoResult(result, params, label)


def masked_lmax(n: int) -> int:
    """Largest absolute weight of a masked hard-family instance, an O(n^4) quantity."""
    L = 5 * n
    phi = golomb_potential(n).phi
    spread = max(phi) - min(phi)
    return L + mask_constant(L, n) * spread

