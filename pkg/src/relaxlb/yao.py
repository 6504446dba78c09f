"""Experiments on the uniform distribution over ``hard_rand`` instances."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import SOURCE, hard_rand
from .machine import EQ, RELAX, BudgetExhausted, Transcript, run
from .strategies import make_strategy


class IncompleteGame(ValueError):
    """The transcript never accessed the whole path in order."""


def sample_permutation(n: int, rng: np.random.Generator) -> list[int]:
    """Source first, the remaining vertices uniformly shuffled."""
    if n < 2:
        raise ValueError("need n >= 2")
    return [SOURCE] + [int(v) + 1 for v in rng.permutation(n - 1)]


@dataclass
class PhaseTimes:
    t: list[int]  # t[0] = 0, t[k] for k = 1..(n-1)/2
    dt: list[int]  # dt[k-1] = t[k] - t[k-1]


def phase_times(transcript: Transcript, pi: list[int], complete: bool = True) -> PhaseTimes:
    """Greedy scan for the path edges of ``pi`` accessed in order.

    An access is a relaxation or an edge query.  ``t[k]`` is the step at
    which edge ``(x_{2k-1}, x_{2k})`` completes the in-order prefix.  With
    ``complete=False`` a partial result is returned instead of raising.
    """
    path = list(zip(pi, pi[1:]))
    m = (len(pi) - 1) // 2
    t = [0]
    j = 0
    if path:
        want = path[0]
        for step, op, _ in transcript:
            if (op.kind == RELAX or op.kind == EQ) and (op.u, op.v) == want:
                j += 1
                if j % 2 == 0:
                    t.append(step)
                if j == len(path):
                    break
                want = path[j]
    if len(t) <= m and complete:
        raise IncompleteGame(f"only {len(t) - 1} of {m} phases completed")
    return PhaseTimes(t, [b - a for a, b in zip(t, t[1:])])


def phase_expectation_bound(n: int, k: int) -> int:
    """``(n-2k+1)(n-2k+2)/2``; the product of consecutive integers is even."""
    return (n - 2 * k + 1) * (n - 2 * k + 2) // 2


def expected_lower_bound(n: int) -> int:
    if n % 2 == 0:
        raise ValueError("bound is stated for odd n")
    return sum(phase_expectation_bound(n, k) for k in range(1, (n - 1) // 2 + 1))


def expected_lower_bound_closed(n: int) -> int:
    """Closed form of :func:`expected_lower_bound`: ``(n^2 - 1)(2n + 3) / 24``."""
    return (n * n - 1) * (2 * n + 3) // 24


def sample_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, index])


@dataclass
class SampleRecord:
    sample: int
    pi: list[int]
    reduced_cost: Optional[int]
    ops: int
    correct: bool
    budget_exhausted: bool
    t: list[int]


@dataclass
class ExperimentStats:
    strategy: str
    n: int
    samples: int
    seed: int
    records: list[SampleRecord] = field(repr=False)
    bound: int = 0

    def _costs(self) -> np.ndarray:
        return np.array([r.reduced_cost for r in self.records if r.reduced_cost is not None], dtype=float)

    @property
    def mean_reduced_cost(self) -> float:
        c = self._costs()
        return float(c.mean()) if c.size else math.nan

    @property
    def std_reduced_cost(self) -> float:
        c = self._costs()
        return float(c.std(ddof=1)) if c.size > 1 else 0.0

    @property
    def mean_dt(self) -> list[float]:
        m = (self.n - 1) // 2
        full = [r.t for r in self.records if len(r.t) == m + 1]
        if not full:
            return []
        t = np.array(full, dtype=float)
        return [float(x) for x in np.diff(t, axis=1).mean(axis=0)]

    @property
    def phase_bounds(self) -> list[int]:
        return [phase_expectation_bound(self.n, k) for k in range(1, (self.n - 1) // 2 + 1)]

    def to_csv(self) -> str:
        """One row per sample, then a ``mean`` row carrying the bound in the last column."""
        m = (self.n - 1) // 2
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(
            ["sample", "strategy", "n", "seed", "reduced_cost"] + [f"t_{k}" for k in range(1, m + 1)] + ["bound"]
        )
        for r in self.records:
            ts = r.t[1:] + [""] * (m + 1 - len(r.t))
            cost = "" if r.reduced_cost is None else r.reduced_cost
            out.writerow([r.sample, self.strategy, self.n, self.seed, cost] + ts + [""])
        means = self.mean_dt
        cum = [float(x) for x in np.cumsum(means)] if means else [math.nan] * m
        out.writerow(
            ["mean", self.strategy, self.n, self.seed, _fmt(self.mean_reduced_cost)]
            + [_fmt(x) for x in cum]
            + [self.bound]
        )
        return buf.getvalue()


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.3f}"


def run_sample(strategy_name: str, n: int, seed: int, index: int, L: Optional[int] = None, budget=None) -> SampleRecord:
    ss = sample_seed(seed, index)
    perm_ss, strat_ss = ss.spawn(2)
    pi = sample_permutation(n, np.random.default_rng(perm_ss))
    l = hard_rand(pi, L)
    strat_seed = int(strat_ss.generate_state(1, dtype=np.uint64)[0])
    strategy = make_strategy(strategy_name, n, seed=strat_seed)
    exhausted = False
    try:
        res = run(strategy, l, budget=budget, until_correct=True)
    except BudgetExhausted as exc:
        res = exc.result
        exhausted = True
    times = phase_times(res.transcript, pi, complete=False)
    return SampleRecord(index, pi, res.reduced_cost, res.ops, res.correct, exhausted, times.t)


def experiment(
    strategy_name: str,
    n: int,
    samples: int = 50,
    seed: int = 0,
    L: Optional[int] = None,
    budget: Optional[int] = None,
    jobs: int = 1,
) -> ExperimentStats:
    """Sample ``hard_rand`` instances and record reduced costs and phase times.

    Each sample draws its permutation and strategy seed from
    ``SeedSequence([seed, index])``, so results do not depend on ``jobs``.
    """
    if n % 2 == 0 or n < 3:
        raise ValueError("experiments need odd n >= 3")
    if samples < 1:
        raise ValueError("samples must be positive")
    args = [(strategy_name, n, seed, i, L, budget) for i in range(samples)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_sample, *zip(*args)))
    else:
        records = [run_sample(*a) for a in args]
    return ExperimentStats(strategy_name, n, samples, seed, records, expected_lower_bound(n))


def d_gap_observer(pi: list[int]):
    """Observer for :func:`run` asserting the gap bound on a ``hard_rand(pi)`` run.

    Vertices off the committed prefix (path edges accessed in order, as in
    :func:`phase_times`) must have D-values within n/2 of each other.
    Initialization already sets ``D[x1] = n``, so ``(s, x1)`` counts as
    accessed from the start.
    """
    n = len(pi)
    path = list(zip(pi, pi[1:]))
    state_j = [1]

    def observe(t, op, ans, state):
        j = state_j[0]
        if j < len(path) and (op.kind == RELAX or op.kind == EQ) and (op.u, op.v) == path[j]:
            j = state_j[0] = j + 1
        rest = [state.d[v] for v in pi[j + 1:]]
        if rest and 2 * (max(rest) - min(rest)) > n:
            raise AssertionError(f"step {t}: D-values off the prefix spread {max(rest) - min(rest)} > n/2")

    return observe
