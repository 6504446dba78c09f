"""The query/relaxation machine.

An algorithm is a :class:`Strategy` that emits one operation at a time and
only ever sees the answers to its own operations.  An environment answers
operations; :class:`ConcreteEnvironment` does so truthfully for a fixed
weight assignment.  Every operation costs one step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .core import SOURCE, WeightAssignment

RELAX = "relax"
EQ = "eq"
DQ = "dq"
WQ = "wq"
ALL_KINDS = frozenset({RELAX, EQ, DQ, WQ})
EDGE_ONLY = frozenset({RELAX, EQ})


class Relax(NamedTuple):
    u: int
    v: int
    kind = RELAX


class EdgeQuery(NamedTuple):
    """``D[u] + l(u, v) < D[v]?``"""
    u: int
    v: int
    kind = EQ


class DQuery(NamedTuple):
    """``D[u] < D[v]?``"""
    u: int
    v: int
    kind = DQ


class WeightQuery(NamedTuple):
    """``l(u, v) < l(x, y)?``"""
    u: int
    v: int
    x: int
    y: int
    kind = WQ


Operation = Relax | EdgeQuery | DQuery | WeightQuery
_OP_TYPES = {RELAX: Relax, EQ: EdgeQuery, DQ: DQuery, WQ: WeightQuery}


class Answer(Enum):
    YES = "yes"
    NO = "no"
    DONE = "done"


YES, NO, DONE = Answer.YES, Answer.NO, Answer.DONE


class ModelViolation(RuntimeError):
    """An operation outside what the strategy declared or the environment supports."""


class BudgetExhausted(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def default_budget(n: int) -> int:
    # depth-n^3 truncation to Bellman-Ford gives 2n^3; one extra n^3 of slack
    return 3 * n**3


def validate_operation(op, n: int) -> None:
    u, v = op[0], op[1]
    if u == v or not (0 <= u < n and 0 <= v < n) or (op.kind == WQ and not (0 <= op.x < n and 0 <= op.y < n and op.x != op.y)):
        raise ModelViolation(f"{op} is not an edge of the complete digraph on {n} vertices")


class DState:
    """Tentative distances and the parent of the last strict decrease."""

    __slots__ = ("d", "parent")

    def __init__(self, d: list[int], parent: list[Optional[int]]):
        self.d = d
        self.parent = parent

    @classmethod
    def initial(cls, l: WeightAssignment) -> "DState":
        d = list(l.weights[SOURCE])
        d[SOURCE] = 0
        parent: list[Optional[int]] = [SOURCE] * l.n
        parent[SOURCE] = None
        return cls(d, parent)

    def copy(self) -> "DState":
        return DState(list(self.d), list(self.parent))

    def __eq__(self, other):
        return isinstance(other, DState) and self.d == other.d and self.parent == other.parent

    def __repr__(self):
        return f"DState(d={self.d})"

    def step(self, op, w) -> Answer:
        """Apply ``op`` in place under weight matrix ``w`` (rows of ints)."""
        d = self.d
        kind = op.kind
        if kind == RELAX:
            u, v = op.u, op.v
            cand = d[u] + w[u][v]
            if cand < d[v]:
                d[v] = cand
                self.parent[v] = u
            return DONE
        if kind == EQ:
            return YES if d[op.u] + w[op.u][op.v] < d[op.v] else NO
        if kind == DQ:
            return YES if d[op.u] < d[op.v] else NO
        if kind == WQ:
            return YES if w[op.u][op.v] < w[op.x][op.y] else NO
        raise ModelViolation(f"unknown operation {op!r}")


def init_dstate(l: WeightAssignment) -> DState:
    return DState.initial(l)


def apply(state: DState, op, l: WeightAssignment) -> tuple[DState, Answer]:
    """Functional form of :meth:`DState.step`; ``state`` is left untouched."""
    new = state.copy()
    return new, new.step(op, l.weights)


class Transcript:
    """Operations and answers in execution order; steps are numbered from 1."""

    def __init__(self, records: Sequence[tuple] = ()):
        self.ops: list = [op for op, _ in records]
        self.answers: list[Answer] = [a for _, a in records]

    def append(self, op, ans: Answer) -> None:
        self.ops.append(op)
        self.answers.append(ans)

    def __len__(self):
        return len(self.ops)

    def __iter__(self) -> Iterator[tuple[int, object, Answer]]:
        for t, (op, ans) in enumerate(zip(self.ops, self.answers), start=1):
            yield t, op, ans

    def __getitem__(self, t: int) -> tuple:
        """Record at 1-based step ``t``."""
        return self.ops[t - 1], self.answers[t - 1]

    def prefix(self, steps: int) -> "Transcript":
        return Transcript(list(zip(self.ops[:steps], self.answers[:steps])))

    def __eq__(self, other):
        return isinstance(other, Transcript) and self.ops == other.ops and self.answers == other.answers

    def relaxations(self) -> list:
        return [op for op in self.ops if op.kind == RELAX]

    def to_lines(self) -> Iterator[str]:
        for t, op, ans in self:
            rec = {"t": t, "op": op.kind, "u": op.u, "v": op.v}
            if op.kind == WQ:
                rec["x"], rec["y"] = op.x, op.y
            rec["ans"] = ans.value
            yield json.dumps(rec)

    @classmethod
    def from_lines(cls, lines) -> "Transcript":
        out = cls()
        expected = 1
        for line in lines:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("t") != expected:
                raise ValueError(f"transcript step {rec.get('t')} out of order, expected {expected}")
            kind = rec["op"]
            if kind not in _OP_TYPES:
                raise ValueError(f"unknown operation kind {kind!r}")
            if kind == WQ:
                op = WeightQuery(rec["u"], rec["v"], rec["x"], rec["y"])
            else:
                op = _OP_TYPES[kind](rec["u"], rec["v"])
            out.append(op, Answer(rec["ans"]))
            expected += 1
        return out

    def write(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")

    @classmethod
    def read(cls, path) -> "Transcript":
        with open(path) as fh:
            return cls.from_lines(fh)


class Strategy:
    """An algorithm in the model.

    Subclasses implement :meth:`program` as a generator that yields
    operations and receives each operation's answer from ``yield``.
    Returning from the generator halts the strategy.  The program sees
    nothing but ``n``, ``s``, ``seed`` and the answers.
    """

    name = "strategy"
    kinds: frozenset = EDGE_ONLY

    def __init__(self, n: int, s: int = SOURCE, seed: Optional[int] = None):
        self.n = n
        self.s = s
        self.seed = seed
        self._gen = None

    def program(self):
        raise NotImplementedError

    @property
    def operations(self):
        """The running program; drive it with ``send(previous_answer)``."""
        if self._gen is None:
            self._gen = self.program()
        return self._gen

    def next(self, answer: Optional[Answer] = None):
        """Next operation given the previous answer, or ``None`` to halt."""
        try:
            return self.operations.send(answer)
        except StopIteration:
            return None

    def budget_hint(self) -> Optional[int]:
        """Step budget to use when the caller gives none; ``None`` means :func:`default_budget`."""
        return None

    def fresh(self) -> "Strategy":
        """A new, unstarted instance with the same parameters."""
        return type(self)(self.n, s=self.s, seed=self.seed)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, seed={self.seed})"


class ConcreteEnvironment:
    """Answers truthfully for a fixed weight assignment."""

    def __init__(self, l: WeightAssignment, state: Optional[DState] = None):
        self.l = l
        self.state = state if state is not None else DState.initial(l)
        self._w = l.weights

    def supports(self, kind: str) -> bool:
        return kind in ALL_KINDS

    def answer(self, op) -> Answer:
        return self.state.step(op, self._w)


@dataclass
class RunResult:
    transcript: Transcript
    state: DState
    truth: tuple[int, ...]
    reduced_cost: Optional[int]
    halted: bool

    @property
    def correct(self) -> bool:
        return tuple(self.state.d) == self.truth

    @property
    def ops(self) -> int:
        return len(self.transcript)


def run(
    strategy: Strategy,
    l: WeightAssignment,
    budget: Optional[int] = None,
    until_correct: bool = False,
    observe: Optional[Callable] = None,
) -> RunResult:
    """Execute ``strategy`` against ``l`` until it halts.

    ``reduced_cost`` is the first step after which the D-vector equals the
    true distances (0 if initialization already does), or ``None``.  With
    ``until_correct`` the run stops at that step.  ``observe(t, op, ans,
    state)`` is called after every step.  Raises :class:`BudgetExhausted`,
    carrying the partial result, if the strategy wants more than ``budget``
    steps.
    """
    n = l.n
    if budget is None:
        budget = strategy.budget_hint() or default_budget(n)
    if budget < 1:
        raise ValueError("budget must be positive")
    truth = l.distances
    env = ConcreteEnvironment(l)
    state = env.state
    d = state.d
    wrong = sum(1 for a, b in zip(d, truth) if a != b)
    reduced = 0 if wrong == 0 else None
    transcript = Transcript()
    kinds = strategy.kinds
    ans = None
    halted = False
    t = 0
    while not (until_correct and reduced is not None):
        op = strategy.next(ans)
        if op is None:
            halted = True
            break
        if op.kind not in kinds:
            raise ModelViolation(f"{strategy!r} declared {sorted(kinds)} but emitted {op}")
        validate_operation(op, n)
        if t >= budget:
            raise BudgetExhausted(
                f"{strategy!r} exceeded budget {budget}",
                RunResult(transcript, state, truth, reduced, False),
            )
        if op.kind == RELAX:
            v = op.v
            before = d[v]
            ans = env.answer(op)
            if d[v] != before:
                wrong += (d[v] != truth[v]) - (before != truth[v])
        else:
            ans = env.answer(op)
        t += 1
        transcript.append(op, ans)
        if reduced is None and wrong == 0:
            reduced = t
        if observe is not None:
            observe(t, op, ans, state)
    return RunResult(transcript, state, truth, reduced, halted)


@dataclass
class ReplayResult:
    consistent: bool
    first_mismatch: Optional[int]
    state: DState


def replay(transcript: Transcript, l: WeightAssignment, state: Optional[DState] = None) -> ReplayResult:
    """Re-execute a transcript under ``l`` and compare every recorded answer."""
    state = state if state is not None else DState.initial(l)
    w = l.weights
    d, parent = state.d, state.parent
    first = None
    for t, (op, ans) in enumerate(zip(transcript.ops, transcript.answers), start=1):
        kind = op.kind
        if kind == RELAX:
            u, v = op
            cand = d[u] + w[u][v]
            if cand < d[v]:
                d[v] = cand
                parent[v] = u
            if ans is not DONE and first is None:
                first = t
            continue
        if kind == EQ:
            u, v = op
            got = YES if d[u] + w[u][v] < d[v] else NO
        else:
            got = state.step(op, w)
        if got is not ans and first is None:
            first = t
    return ReplayResult(first is None, first, state)



@dataclass
class BatchReplay:
    first_mismatch: np.ndarray  # per assignment; 0 means no mismatch
    snapshots: dict = field(default_factory=dict)  # step -> (S, n) D-values after that step


def replay_batch(
    transcript: Transcript,
    assignments: Sequence[WeightAssignment],
    snapshot_steps: Sequence[int] = (),
    stop: Optional[int] = None,
) -> BatchReplay:
    """Replay one transcript under many assignments at once.

    Vectorised across assignments; ``snapshot_steps`` may include 0 for the
    initial state.  Only the first ``stop`` steps are replayed if given.
    """
    if not assignments:
        return BatchReplay(np.zeros(0, dtype=np.int64))
    W = np.stack([a.as_array() for a in assignments], axis=-1)  # (n, n, S)
    S = W.shape[-1]
    D = W[SOURCE].copy()  # (n, S)
    D[SOURCE] = 0
    first = np.zeros(S, dtype=np.int64)
    want = set(snapshot_steps)
    snaps = {}
    if 0 in want:
        snaps[0] = D.T.copy()
    limit = len(transcript) if stop is None else min(stop, len(transcript))
    ops, answers = transcript.ops, transcript.answers
    for t in range(1, limit + 1):
        op = ops[t - 1]
        kind = op.kind
        if kind == RELAX:
            np.minimum(D[op.v], D[op.u] + W[op.u, op.v], out=D[op.v])
        else:
            if kind == EQ:
                res = D[op.u] + W[op.u, op.v] < D[op.v]
            elif kind == DQ:
                res = D[op.u] < D[op.v]
            else:
                res = W[op.u, op.v] < W[op.x, op.y]
            expect = answers[t - 1] is YES
            bad = res != expect
            if bad.any():
                first[bad & (first == 0)] = t
        if t in want:
            snaps[t] = D.T.copy()
    return BatchReplay(first, snaps)
