"""Weight assignments, potentials, hard instances and the reference distance oracle.

Vertices are ``0..n-1`` and vertex ``0`` is always the source.  Graphs are
complete digraphs; the diagonal of a weight matrix is stored as 0 and never
read.  Weights are plain Python ints, so masked assignments cannot overflow.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

SOURCE = 0


class NegativeCycle(ValueError):
    """The assignment has a negative cycle, so distances are undefined."""


class InstanceError(ValueError):
    """Malformed instance document or invalid generator arguments."""


@dataclass(frozen=True, eq=True)
class WeightAssignment:
    n: int
    weights: tuple[tuple[int, ...], ...] = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or len(self.weights) != self.n:
            raise InstanceError(f"expected {self.n} rows, got {len(self.weights)}")
        for u, row in enumerate(self.weights):
            if len(row) != self.n:
                raise InstanceError(f"row {u} has length {len(row)}, expected {self.n}")
            if row[u] != 0:
                raise InstanceError(f"diagonal entry ({u},{u}) must be 0")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "WeightAssignment":
        return cls(len(rows), tuple(tuple(int(x) for x in row) for row in rows))

    @classmethod
    def from_function(cls, n: int, fn) -> "WeightAssignment":
        return cls(n, tuple(tuple(0 if u == v else int(fn(u, v)) for v in range(n)) for u in range(n)))

    def __call__(self, u: int, v: int) -> int:
        return self.weights[u][v]

    def edges(self) -> Iterator[tuple[int, int]]:
        return all_edges(self.n)

    @cached_property
    def lmax(self) -> int:
        return max((abs(w) for row in self.weights for w in row), default=0)

    def as_array(self) -> np.ndarray:
        """int64 copy of the matrix; refuses values that could overflow path sums."""
        if self.lmax * max(self.n, 1) >= 2**62:
            raise OverflowError("weights too large for int64 path arithmetic")
        return np.array(self.weights, dtype=np.int64)

    @cached_property
    def distances(self) -> tuple[int, ...]:
        return true_distances(self)

    @cached_property
    def has_negative_cycle(self) -> bool:
        try:
            self.distances
        except NegativeCycle:
            return True
        return False

    def path_length(self, path: Sequence[int]) -> int:
        w = self.weights
        return sum(w[a][b] for a, b in zip(path, path[1:]))

    # instance file: {"version": 1, "n": n, "s": 0, "weights": [row-major]}
    def to_document(self) -> dict:
        return {"version": 1, "n": self.n, "s": SOURCE, "weights": [x for row in self.weights for x in row]}

    @classmethod
    def from_document(cls, doc: dict) -> "WeightAssignment":
        if not isinstance(doc, dict):
            raise InstanceError("instance document must be an object")
        if doc.get("version") != 1:
            raise InstanceError(f"unsupported instance version {doc.get('version')!r}")
        if doc.get("s", SOURCE) != SOURCE:
            raise InstanceError("source vertex must be 0")
        n = doc.get("n")
        flat = doc.get("weights")
        if not isinstance(n, int) or n < 1 or not isinstance(flat, list) or len(flat) != n * n:
            raise InstanceError("weights must be a row-major list of n*n integers")
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in flat):
            raise InstanceError("weights must be integers")
        return cls.from_rows([flat[u * n:(u + 1) * n] for u in range(n)])


def all_edges(n: int) -> Iterator[tuple[int, int]]:
    """Edges of the complete digraph in lexicographic order."""
    for u in range(n):
        for v in range(n):
            if u != v:
                yield u, v


def save_instance(l: WeightAssignment, path) -> None:
    Path(path).write_text(json.dumps(l.to_document()) + "\n")


def load_instance(path) -> WeightAssignment:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: not valid JSON ({exc})") from exc
    return WeightAssignment.from_document(doc)


@dataclass(frozen=True)
class Potential:
    phi: tuple[int, ...]

    def __post_init__(self):
        if not self.phi:
            raise InstanceError("potential needs at least one vertex")
        if self.phi[SOURCE] != 0:
            raise InstanceError("potential must vanish at the source")

    @property
    def n(self) -> int:
        return len(self.phi)

    def __getitem__(self, v: int) -> int:
        return self.phi[v]

    @classmethod
    def zero(cls, n: int) -> "Potential":
        return cls((0,) * n)


def delta_potential(phi: Potential) -> WeightAssignment:
    p = phi.phi
    return WeightAssignment.from_function(phi.n, lambda u, v: p[v] - p[u])


def combine(l: WeightAssignment, phi: Potential, c: int = 1) -> WeightAssignment:
    """``l + c * delta_potential(phi)``."""
    if l.n != phi.n:
        raise InstanceError(f"size mismatch: assignment has n={l.n}, potential has n={phi.n}")
    p = phi.phi
    return WeightAssignment.from_function(l.n, lambda u, v: l.weights[u][v] + c * (p[v] - p[u]))


def true_distances(l: WeightAssignment) -> tuple[int, ...]:
    """Distances from the source by repeated full relaxation sweeps.

    Starts from the model's initialization ``D[v] = l(s, v)``.  Without a
    negative cycle the sweeps stabilise within n rounds; a change in the
    n-th round means a negative cycle and raises :class:`NegativeCycle`.
    """
    n, w = l.n, l.weights
    d = list(w[SOURCE])
    d[SOURCE] = 0
    for _ in range(n):
        changed = False
        for u in range(n):
            du, row = d[u], w[u]
            for v in range(n):
                if v != u and du + row[v] < d[v]:
                    d[v] = du + row[v]
                    changed = True
        if not changed:
            return tuple(d)
    raise NegativeCycle("distances still improve after n relaxation rounds")


def _check_hard_args(pi: Sequence[int], L: int, min_L: int) -> int:
    n = len(pi)
    if sorted(pi) != list(range(n)):
        raise InstanceError("pi must be a permutation of 0..n-1")
    if n < 1 or pi[0] != SOURCE:
        raise InstanceError("pi must start with the source vertex 0")
    if n % 2 == 0:
        raise InstanceError(f"hard families need odd n, got {n}")
    if L < min_L:
        raise InstanceError(f"L={L} is below the required minimum {min_L}")
    return n


def _path_family(pi: Sequence[int], short: int, long_even) -> WeightAssignment:
    n = len(pi)
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1:
                w = short
            elif i % 2 == 0:
                w = long_even(i)
            else:
                w = long_even(None)
            a, b = pi[i], pi[j]
            rows[a][b] = rows[b][a] = w
    return WeightAssignment.from_rows(rows)


def hard_det(pi: Sequence[int], L: int | None = None) -> WeightAssignment:
    """Symmetric instance whose shortest-path tree is the Hamiltonian path ``pi``.

    Path edges weigh 2; a chord leaving ``pi[i]`` weighs ``L - 5i/2`` for even
    ``i`` and ``L`` for odd ``i``.  Distances are ``2j`` at ``pi[j]``.
    """
    n = len(pi)
    if L is None:
        L = 5 * n
    _check_hard_args(pi, L, 5 * n)
    # i even, so 5*i/2 is exact
    return _path_family(pi, 2, lambda i: L if i is None else L - 5 * i // 2)


def hard_rand(pi: Sequence[int], L: int | None = None) -> WeightAssignment:
    """Variant used for the randomized bound: path edges weigh n, chords ``L - (n + 1/2) i``."""
    n = len(pi)
    if L is None:
        L = 5 * n * n
    _check_hard_args(pi, L, 5 * n * n)
    return _path_family(pi, n, lambda i: L if i is None else L - n * i - i // 2)


def identity_permutation(n: int) -> list[int]:
    return list(range(n))
