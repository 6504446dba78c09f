import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_distances, random_instance
from relaxlb.core import (
    InstanceError,
    NegativeCycle,
    Potential,
    WeightAssignment,
    combine,
    delta_potential,
    hard_det,
    hard_rand,
    load_instance,
    save_instance,
    true_distances,
)


def test_hard_det_n5_weights_and_distances():
    l = hard_det(list(range(5)), 25)
    assert l(0, 1) == 2
    assert l(0, 2) == 25
    assert l(1, 3) == 25
    assert l(2, 4) == 20
    assert l(3, 1) == 25 and l(4, 2) == 20  # symmetric
    assert true_distances(l) == (0, 2, 4, 6, 8)


def test_hard_det_permuted_distances():
    pi = [0, 3, 1, 4, 2]
    d = true_distances(hard_det(pi))
    assert [d[v] for v in pi] == [0, 2, 4, 6, 8]


def test_hard_rand_n5():
    l = hard_rand(list(range(5)), 125)
    assert l(0, 1) == 5
    assert l(0, 2) == 125
    assert l(2, 4) == 114
    assert true_distances(l) == (0, 5, 10, 15, 20)


def test_zero_weights():
    assert true_distances(WeightAssignment.from_function(4, lambda u, v: 0)) == (0, 0, 0, 0)


@pytest.mark.parametrize(
    "pi, L",
    [([1, 0, 2], 15), ([0, 1, 2, 3], 20), ([0, 1, 1], 15), ([0, 1, 2], 14)],
)
def test_hard_det_rejects_bad_args(pi, L):
    with pytest.raises(InstanceError):
        hard_det(pi, L)


def test_hard_rand_rejects_small_L():
    with pytest.raises(InstanceError):
        hard_rand([0, 1, 2], 44)


def test_negative_cycle_detected():
    l = WeightAssignment.from_rows([[0, 1, 5], [-2, 0, 1], [0, 0, 0]])
    with pytest.raises(NegativeCycle):
        true_distances(l)
    assert l.has_negative_cycle


def test_diagonal_must_be_zero():
    with pytest.raises(InstanceError):
        WeightAssignment.from_rows([[1, 0], [0, 0]])


def test_oracle_matches_enumeration(rng):
    for _ in range(150):
        n = int(rng.integers(2, 7))
        l = random_instance(rng, n)
        assert true_distances(l) == brute_distances(l)


def test_instance_roundtrip(tmp_path, rng):
    l = random_instance(rng, 5)
    save_instance(l, tmp_path / "i.json")
    assert load_instance(tmp_path / "i.json") == l


@pytest.mark.parametrize(
    "doc",
    [
        {"version": 2, "n": 1, "s": 0, "weights": [0]},
        {"version": 1, "n": 2, "s": 1, "weights": [0, 0, 0, 0]},
        {"version": 1, "n": 2, "s": 0, "weights": [0, 0, 0]},
        {"version": 1, "n": 2, "s": 0, "weights": [0, 1.5, 0, 0]},
        {"version": 1, "n": 2, "s": 0, "weights": [0, 1, 1, 3]},
    ],
)
def test_bad_documents(doc):
    with pytest.raises(InstanceError):
        WeightAssignment.from_document(doc)


def test_potential_must_vanish_at_source():
    with pytest.raises(InstanceError):
        Potential((1, 2))


def test_combine_size_mismatch():
    with pytest.raises(InstanceError):
        combine(hard_det([0, 1, 2]), Potential((0, 1)))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=2, max_size=6), st.integers(0, 2**32 - 1))
def test_delta_potential_paths_are_path_independent(tail, seed):
    phi = Potential((0,) + tuple(tail[1:]))
    l = delta_potential(phi)
    n = phi.n
    rng = np.random.default_rng(seed)
    for _ in range(20):
        k = int(rng.integers(2, n + 1))
        path = [int(x) for x in rng.permutation(n)[:k]]
        assert l.path_length(path) == phi[path[-1]] - phi[path[0]]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_combine_shifts_distances(n, seed):
    rng = np.random.default_rng(seed)
    l = random_instance(rng, n)
    phi = Potential((0,) + tuple(int(x) for x in rng.integers(-30, 31, size=n - 1)))
    shifted = true_distances(combine(l, phi, 3))
    assert shifted == tuple(d + 3 * phi[v] for v, d in enumerate(true_distances(l)))
