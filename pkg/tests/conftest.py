import itertools

import numpy as np
import pytest

from relaxlb.core import SOURCE, WeightAssignment


def random_instance(rng, n, lo=-10, hi=10):
    """No negative cycle guaranteed: non-negative base plus a potential shift, clipped to [lo, hi]."""
    half = min(-lo, hi) // 2
    phi = rng.integers(-half, half + 1, size=n)
    rows = [[0] * n for _ in range(n)]
    for u in range(n):
        for v in range(n):
            if u != v:
                shift = int(phi[v] - phi[u])
                base = int(rng.integers(max(0, lo - shift), hi - shift + 1))
                rows[u][v] = base + shift
    return WeightAssignment.from_rows(rows)


def nonneg_instance(rng, n, hi=20):
    m = rng.integers(0, hi + 1, size=(n, n))
    np.fill_diagonal(m, 0)
    return WeightAssignment.from_rows(m.tolist())


def brute_distances(l):
    """Minimum over every simple path from the source, by explicit enumeration."""
    n, w = l.n, l.weights
    best = [w[SOURCE][v] if v != SOURCE else 0 for v in range(n)]
    others = [v for v in range(n) if v != SOURCE]
    for k in range(1, n):
        for mid in itertools.permutations(others, k):
            path = (SOURCE,) + mid
            length = sum(w[a][b] for a, b in zip(path, path[1:]))
            if length < best[path[-1]]:
                best[path[-1]] = length
    return tuple(best)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
