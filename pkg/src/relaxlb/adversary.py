"""Adaptive adversary for edge-query/relaxation strategies.

The adversary commits a Hamiltonian path ``x0 = s, x1, ..., x_{n-1}`` two
vertices per phase and answers only from edge marks; it never tracks
D-values.  Truthfulness is certified afterwards by replaying the transcript
under concrete assignments ``hard_det(pi)`` for permutations ``pi`` that are
consistent with the committed prefix (see :func:`check_invariants`).

In phase k, with ``x = x_{2k-2}`` the last committed vertex and ``Y`` the
uncommitted vertices, ``A`` is the set of edges x -> Y and ``B`` the edges
inside ``Y``.  Rules for an access to edge (u, v):

* (u, v) in A: a relaxation marks it; a query says yes iff it is unmarked.
* (u, v) in B, relaxation: marks it if (x, u) is marked; once all of A and B
  are marked the phase ends and (u, v) becomes ``(x_{2k-1}, x_{2k})``.
* (u, v) in B, query: no if (x, u) is unmarked; otherwise yes if (u, v) is
  the last unmarked edge of A and B, else mark it and say no.
* anything else: queries say no, relaxations are ignored.

Since D starts at ``l(s, v)`` rather than above every chord, all of ``A`` is
marked up front in phase 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import SOURCE, WeightAssignment, hard_det
from .machine import (
    DONE,
    EDGE_ONLY,
    EQ,
    NO,
    RELAX,
    YES,
    BudgetExhausted,
    ConcreteEnvironment,
    DState,
    ModelViolation,
    Strategy,
    Transcript,
    default_budget,
    replay,
    replay_batch,
    validate_operation,
)


class InvariantViolation(AssertionError):
    def __init__(self, prop: str, phase: int, step: int, detail: str = ""):
        super().__init__(f"{prop} violated in phase {phase} at step {step}: {detail}")
        self.prop = prop
        self.phase = phase
        self.step = step


def det_lower_bound(n: int) -> int:
    """``(n-1)^2 + (n-3)^2 + ... + 2^2 = n(n^2 - 1)/6`` for odd n."""
    if n % 2 == 0:
        raise ValueError("bound is stated for odd n")
    return n * (n * n - 1) // 6


def phase_bound(n: int, k: int) -> int:
    return (n - 2 * k + 1) ** 2


def check_family_args(n: int, L: Optional[int]) -> int:
    if n < 3 or n % 2 == 0:
        raise ValueError(f"the adversary needs odd n >= 3, got {n}")
    if L is None:
        return 5 * n
    if L < 5 * n:
        raise ValueError(f"L={L} is below 5n={5 * n}")
    return L


class Adversary:
    """Adversary state plus the environment interface (edge queries only)."""

    def __init__(self, n: int, L: Optional[int] = None, check: bool = True):
        self.L = check_family_args(n, L)
        self.n = n
        self.check = check
        self.prefix = [SOURCE]
        self.phase = 1
        self.finished = False
        self.last_pair: Optional[tuple[int, int]] = None
        self.steps = 0
        self.phase_ends: list[int] = []  # step at which phase k ended, k = 1..
        self._in_y = bytearray([1]) * n
        self._in_y[SOURCE] = 0
        self._start_phase()
        for v in range(n):
            if v != SOURCE:
                self._mark(SOURCE, v)

    @property
    def phases(self) -> int:
        return (self.n - 1) // 2

    @property
    def pivot(self) -> int:
        """Last committed vertex ``x_{2k-2}``; tail of every A-edge."""
        return self.prefix[-1]

    def uncommitted(self) -> list[int]:
        return [v for v in range(self.n) if self._in_y[v]]

    def _start_phase(self) -> None:
        self._pivot = self.prefix[-1]
        r = self.n - len(self.prefix)
        self._marks = bytearray(self.n * self.n)
        self.unmarked = r * r  # |A| + |B| = r + r(r - 1)

    def _mark(self, u: int, v: int) -> None:
        i = u * self.n + v
        if not self._marks[i]:
            self._marks[i] = 1
            self.unmarked -= 1
            self.last_pair = (u, v)
            if self.check and self.unmarked == 1:
                self._check_last_unmarked()

    def is_marked(self, u: int, v: int) -> bool:
        return bool(self._marks[u * self.n + v])

    def in_A(self, u: int, v: int) -> bool:
        return u == self.pivot and bool(self._in_y[v])

    def in_B(self, u: int, v: int) -> bool:
        return u != v and bool(self._in_y[u]) and bool(self._in_y[v])

    def unmarked_edges(self) -> list[tuple[int, int]]:
        ys = self.uncommitted()
        out = [(self.pivot, v) for v in ys if not self.is_marked(self.pivot, v)]
        out += [(u, v) for u in ys for v in ys if u != v and not self.is_marked(u, v)]
        return out

    def _check_last_unmarked(self) -> None:
        (edge,) = self.unmarked_edges()
        if not self.in_B(*edge):
            raise InvariantViolation("last-unmarked-in-B", self.phase, self.steps, f"{edge} is an A-edge")

    def supports(self, kind: str) -> bool:
        return kind in EDGE_ONLY

    def answer(self, op):
        if self.finished:
            raise RuntimeError("the game is over; answer against the concrete assignment instead")
        kind = op.kind
        if kind != RELAX and kind != EQ:
            raise ModelViolation(f"the adversary only answers edge queries and relaxations, got {op}")
        self.steps += 1
        u, v = op
        in_y = self._in_y
        x = self._pivot
        if u == x and in_y[v]:
            if kind == RELAX:
                self._mark(u, v)
                return DONE
            return NO if self._marks[u * self.n + v] else YES
        if in_y[u] and in_y[v]:
            marks = self._marks
            n = self.n
            if kind == RELAX:
                if marks[x * n + u]:
                    self._mark(u, v)
                    if self.unmarked == 0:
                        self._end_phase(u, v)
                return DONE
            if not marks[x * n + u] or marks[u * n + v]:
                return NO
            if self.unmarked == 1:
                return YES  # the last unmarked edge; left unmarked
            self._mark(u, v)
            return NO
        return DONE if kind == RELAX else NO

    def play(self, strategy: Strategy, budget: int) -> tuple[Transcript, bool, object]:
        """Drive ``strategy`` until the game is finished, it halts, or ``budget`` runs out.

        Same answers as calling :meth:`answer` step by step, with the hot
        state held in locals.  Returns the transcript, whether the strategy
        halted, and the last answer given.
        """
        n, kinds = self.n, strategy.kinds
        send = strategy.operations.send
        transcript = Transcript()
        record_op, record_ans = transcript.ops.append, transcript.answers.append
        in_y, mark = self._in_y, self._mark
        marks, x = self._marks, self._pivot
        t = self.steps
        ans = None
        halted = False
        try:
            while not self.finished:
                op = send(ans)
                kind = op.kind
                if kind not in kinds:
                    raise ModelViolation(f"{strategy!r} emitted undeclared {op}")
                if kind != RELAX and kind != EQ:
                    raise ModelViolation(f"the adversary only answers edge queries and relaxations, got {op}")
                u, v = op
                if u == v or not (0 <= u < n and 0 <= v < n):
                    validate_operation(op, n)
                if t >= budget:
                    raise BudgetExhausted(f"{strategy!r} exceeded budget {budget} against the adversary")
                t += 1
                if u == x and in_y[v]:
                    if kind == RELAX:
                        if not marks[u * n + v]:
                            self.steps = t
                            mark(u, v)
                        ans = DONE
                    else:
                        ans = NO if marks[u * n + v] else YES
                elif in_y[u] and in_y[v]:
                    if kind == RELAX:
                        ans = DONE
                        if marks[x * n + u] and not marks[u * n + v]:
                            self.steps = t
                            mark(u, v)
                            if self.unmarked == 0:
                                self._end_phase(u, v)
                                marks, x = self._marks, self._pivot
                    elif not marks[x * n + u] or marks[u * n + v]:
                        ans = NO
                    elif self.unmarked == 1:
                        ans = YES
                    else:
                        self.steps = t
                        mark(u, v)
                        ans = NO
                else:
                    ans = DONE if kind == RELAX else NO
                record_op(op)
                record_ans(ans)
        except StopIteration:
            halted = True
        finally:
            self.steps = t
        return transcript, halted, ans

    def _end_phase(self, u: int, v: int) -> None:
        self.prefix += [u, v]
        self._in_y[u] = self._in_y[v] = 0
        self.phase_ends.append(self.steps)
        if len(self.prefix) == self.n:
            self.finished = True
            return
        self.phase += 1
        self._start_phase()

    @property
    def weights(self) -> WeightAssignment:
        if not self.finished:
            raise RuntimeError("the permutation is not committed yet")
        return hard_det(self.prefix, self.L)

    def consistent_completion(self, rng: Optional[np.random.Generator] = None) -> list[int]:
        """A full permutation whose ``hard_det`` agrees with every answer so far.

        Mid-phase, the next two path vertices must form a B-edge that is still
        unmarked; the rest of the order is free.
        """
        if self.finished:
            return list(self.prefix)
        rng = rng if rng is not None else np.random.default_rng(0)
        ys = self.uncommitted()
        candidates = [(u, v) for u in ys for v in ys if u != v and not self.is_marked(u, v)]
        u, v = candidates[int(rng.integers(len(candidates)))]
        rest = [w for w in ys if w not in (u, v)]
        rest = [rest[i] for i in rng.permutation(len(rest))]
        return self.prefix + [u, v] + rest


def new_adversary(n: int, L: Optional[int] = None) -> Adversary:
    return Adversary(n, L)


@dataclass
class DuelResult:
    n: int
    L: int
    strategy: str
    seed: Optional[int]
    total_ops: int
    per_phase_ops: list[int]
    pi: list[int]
    l_pi: WeightAssignment = field(repr=False)
    consistent: bool
    correct: bool
    finished: bool  # the adversary committed the whole permutation
    halted: bool
    transcript: Transcript = field(repr=False)
    phase_ends: list[int] = field(default_factory=list)

    @property
    def lower_bound(self) -> int:
        return det_lower_bound(self.n)

    def report(self) -> dict:
        return {
            "n": self.n,
            "L": self.L,
            "strategy": self.strategy,
            "seed": self.seed,
            "total_ops": self.total_ops,
            "per_phase_ops": self.per_phase_ops,
            "pi": self.pi,
            "lower_bound": self.lower_bound,
            "consistent": self.consistent,
            "correct": self.correct,
        }


def duel(
    strategy: Strategy,
    n: Optional[int] = None,
    L: Optional[int] = None,
    budget: Optional[int] = None,
) -> DuelResult:
    """Play ``strategy`` against the adversary, then finish on the committed instance.

    After the last phase the transcript is replayed on ``hard_det(pi)`` to
    rebuild the concrete D-state, and the run continues against that
    instance until D equals the true distances (normally at once).
    ``total_ops`` is the step count at that point.  A strategy that halts
    early is evaluated on a consistent completion of the partial game.
    """
    n = strategy.n if n is None else n
    if strategy.n != n:
        raise ValueError(f"strategy was built for n={strategy.n}, duel asked for n={n}")
    if strategy.kinds - EDGE_ONLY:
        raise ModelViolation(f"{strategy!r} may emit {sorted(strategy.kinds - EDGE_ONLY)}; the duel needs edge-only")
    if budget is None:
        budget = strategy.budget_hint() or default_budget(n)
    adv = Adversary(n, L)
    transcript, halted, ans = adv.play(strategy, budget)

    pi = adv.consistent_completion()
    l_pi = hard_det(pi, adv.L)
    rep = replay(transcript, l_pi)
    truth = l_pi.distances
    state: DState = rep.state
    if adv.finished and not halted:
        env = ConcreteEnvironment(l_pi, state)
        while tuple(state.d) != truth:
            op = strategy.next(ans)
            if op is None:
                halted = True
                break
            if op.kind not in strategy.kinds:
                raise ModelViolation(f"{strategy!r} emitted undeclared {op}")
            validate_operation(op, n)
            if len(transcript) >= budget:
                raise BudgetExhausted(f"{strategy!r} exceeded budget {budget} after the game")
            ans = env.answer(op)
            transcript.append(op, ans)

    ends = list(adv.phase_ends)
    per_phase = [b - a for a, b in zip([0] + ends, ends)]
    return DuelResult(
        n=n,
        L=adv.L,
        strategy=strategy.name,
        seed=strategy.seed,
        total_ops=len(transcript),
        per_phase_ops=per_phase,
        pi=pi,
        l_pi=l_pi,
        consistent=rep.consistent,
        correct=tuple(state.d) == truth,
        finished=adv.finished,
        halted=halted,
        transcript=transcript,
        phase_ends=ends,
    )


@dataclass
class InvariantReport:
    checked_completions: int = 0
    checked_interior_steps: int = 0
    violations: list[InvariantViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, prop, phase, step, detail=""):
        self.violations.append(InvariantViolation(prop, phase, step, detail))


def _random_completion(prefix: list[int], n: int, rng) -> list[int]:
    taken = set(prefix)
    rest = [v for v in range(n) if v not in taken]
    return list(prefix) + [rest[i] for i in rng.permutation(len(rest))]


def check_invariants(result: DuelResult, samples: int = 20, seed: int = 0, interior: int = 3) -> InvariantReport:
    """Certify a finished duel by replay under sampled consistent instances.

    At the end of each phase k, ``samples`` random permutations sharing the
    committed prefix ``x_0..x_{2k}`` must replay the transcript up to that
    point consistently, with ``D[x_j] = 2j`` on the prefix and ``D = L-k+1``
    elsewhere; one step earlier some vertex must still be above its
    distance.  ``interior`` random steps inside each phase are checked
    against the mark-dependent values of the within-phase invariant, with
    marks recomputed by a fresh adversary.
    """
    report = InvariantReport()
    n, L = result.n, result.L
    if not result.finished:
        report.add("finished", len(result.phase_ends) + 1, result.total_ops, "duel did not complete the game")
        return report
    full = replay(result.transcript, result.l_pi)
    if not full.consistent:
        report.add("I0", 0, full.first_mismatch, "final instance disagrees with the transcript")
    rng = np.random.default_rng(seed)
    pi = result.pi
    ends = result.phase_ends
    starts = [0] + ends[:-1]
    phases = len(ends)

    perms, owner = [], []
    for k in range(1, phases + 1):
        for _ in range(samples):
            perms.append(_random_completion(pi[: 2 * k + 1], n, rng))
            owner.append(k)
    owner = np.array(owner)
    interior_steps: dict[int, int] = {}
    for k in range(1, phases + 1):
        lo, hi = starts[k - 1] + 1, ends[k - 1] - 1
        if hi >= lo:
            for t in rng.integers(lo, hi + 1, size=min(interior, hi - lo + 1)).tolist():
                interior_steps[t] = k
    snaps = sorted(set(ends) | {e - 1 for e in ends} | set(interior_steps))
    batch = replay_batch(result.transcript, [hard_det(p, L) for p in perms], snaps, stop=ends[-1])

    for k in range(1, phases + 1):
        cols = np.flatnonzero(owner == k)
        end = ends[k - 1]
        report.checked_completions += cols.size
        first = batch.first_mismatch[cols]
        bad = (first > 0) & (first <= end)
        if bad.any():
            report.add("I0", k, int(first[bad].min()), "an answer disagrees with a consistent completion")
        after = batch.snapshots[end]
        before = batch.snapshots[end - 1]
        for col in cols:
            order = perms[col]
            for j, v in enumerate(order):
                want, prop = (2 * j, "I1") if j <= 2 * k else (L - k + 1, "I2")
                if after[col, v] != want:
                    report.add(prop, k, end, f"D[x_{j}]={after[col, v]}, expected {want}")
            # distances of hard_det are 2j at x_j
            if not any(before[col, v] > 2 * j for j, v in enumerate(order)):
                report.add("necessity", k, end - 1, "every D-value was already correct")

    if interior_steps:
        adv = Adversary(n, L, check=False)
        pending = sorted(interior_steps)
        i = 0
        for t, op, _ in result.transcript:
            if i == len(pending):
                break
            adv.answer(op)
            if t == pending[i]:
                k = interior_steps[t]
                _check_within_phase(report, adv, batch.snapshots[t], perms, owner, k, pi, L, t)
                report.checked_interior_steps += 1
                i += 1
    return report


def _check_within_phase(report, adv: Adversary, D, perms, owner, k, pi, L, t) -> None:
    x = pi[2 * k - 2]
    us, vs = pi[2 * k - 1], pi[2 * k]
    for col in np.flatnonzero(owner == k):
        order, d = perms[col], D[col]
        for j in range(2 * k - 1):
            if d[order[j]] != 2 * j:
                report.add("J1", k, t, f"D[x_{j}]={d[order[j]]}, expected {2 * j}")
        for w in adv.uncommitted():
            a_marked = adv.is_marked(x, w)
            if w == us:
                want, prop = (4 * k - 2 if a_marked else L - k + 2), "J2.2"
            elif w == vs:
                if adv.is_marked(us, vs):
                    want = 4 * k
                else:
                    want = L - k + 1 if a_marked else L - k + 2
                prop = "J2.3"
            else:
                want, prop = (L - k + 1 if a_marked else L - k + 2), "J2.1"
            if d[w] != want:
                report.add(prop, k, t, f"D[{w}]={d[w]}, expected {want}")
