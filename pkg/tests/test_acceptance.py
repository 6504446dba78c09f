"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest -v tests/test_acceptance.py``; the verdict lines are
printed even when output capture is on.
"""

import json
import time

import numpy as np
import pytest

from conftest import brute_distances, nonneg_instance, random_instance
from relaxlb.adversary import check_invariants, det_lower_bound, duel, phase_bound
from relaxlb.cli import main
from relaxlb.core import Potential, WeightAssignment, hard_det, hard_rand, save_instance, true_distances
from relaxlb.golomb import erdos_turan_ruler, golomb_potential, is_golomb
from relaxlb.machine import EDGE_ONLY, replay, run
from relaxlb.reduction import MaskParams, check_potential_oblivious, theorem2_demo, verify_p1, verify_p2, wrap
from relaxlb.strategies import (
    STRATEGIES,
    bannister_eppstein,
    bellman_ford,
    dijkstra_cmp,
    guarded_bf,
    make_strategy,
    random_fair,
    yen,
)
from relaxlb.yao import expected_lower_bound, experiment, phase_expectation_bound, phase_times, sample_permutation

DUEL_NS = (5, 9, 15, 25, 41)
FAIR_SEEDS = range(20)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def duels():
    start = time.perf_counter()
    out = []
    for n in DUEL_NS:
        out.append(duel(guarded_bf(n)))
        out.extend(duel(random_fair(n, seed)) for seed in FAIR_SEEDS)
    return out, time.perf_counter() - start


def test_criterion_01_deterministic_bound(duels, verdict):
    results, elapsed = duels
    bad = []
    for r in results:
        per_phase_ok = len(r.per_phase_ops) == (r.n - 1) // 2 and all(
            ops >= phase_bound(r.n, k) for k, ops in enumerate(r.per_phase_ops, start=1)
        )
        if not (r.total_ops >= det_lower_bound(r.n) and per_phase_ok and r.consistent and r.correct):
            bad.append((r.strategy, r.n, r.seed))
    margin = min(r.total_ops / det_lower_bound(r.n) for r in results)
    verdict(
        1,
        "deterministic lower bound",
        not bad,
        f"{len(results)} duels, {len(bad)} failing, min total_ops/bound {margin:.2f}, "
        f"duel time {elapsed:.1f}s (expected < 10 s, not gated)",
    )


def test_criterion_02_adversary_truthfulness(duels, verdict):
    results, _ = duels
    final_bad = [r for r in results if not replay(r.transcript, r.l_pi).consistent]
    violations = []
    completions = 0
    for i, r in enumerate(results):
        rep = check_invariants(r, samples=20, seed=i)
        completions += rep.checked_completions
        violations += rep.violations
    verdict(
        2,
        "adversary truthfulness",
        not final_bad and not violations,
        f"{len(results)} final replays ({len(final_bad)} inconsistent), "
        f"{completions} boundary completions, {len(violations)} violations",
    )


def _uniform_no_cycle(rng, n):
    """Uniform weights in [-10, 10], raised entrywise until Floyd-Warshall finds no negative cycle."""
    m = rng.integers(-10, 11, size=(n, n))
    np.fill_diagonal(m, 0)
    while True:
        d = m.astype(np.int64).copy()
        for k in range(n):
            d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
        if (np.diag(d) >= 0).all():
            return WeightAssignment.from_rows(m.tolist())
        m = np.minimum(m + (m < 10), 10)
        np.fill_diagonal(m, 0)


def test_criterion_03_oracle_equivalence(verdict):
    rng = np.random.default_rng(3)
    mismatches = 0
    for i in range(500):
        n = int(rng.integers(1, 8))
        l = random_instance(rng, n) if i % 2 else _uniform_no_cycle(rng, n)
        if true_distances(l) != brute_distances(l):
            mismatches += 1
    verdict(3, "oracle equivalence", mismatches == 0, f"500 instances, n <= 7, {mismatches} mismatches")


def test_criterion_04_golomb(verdict):
    start = time.perf_counter()
    bad = [n for n in range(1, 1001) if not (is_golomb(r := erdos_turan_ruler(n)) and max(r) < 8 * n * n)]
    bad_delta = []
    for n in range(1, 201):
        phi = np.array(golomb_potential(n).phi)
        delta = (phi[None, :] - phi[:, None])[~np.eye(n, dtype=bool)]
        if np.unique(delta).size != n * (n - 1):
            bad_delta.append(n)
    elapsed = time.perf_counter() - start
    verdict(
        4,
        "Golomb correctness",
        not bad and not bad_delta and elapsed < 5,
        f"{len(bad)} bad rulers (n <= 1000), {len(bad_delta)} bad delta sets (n <= 200), {elapsed:.2f}s (< 5 s)",
    )


def test_criterion_05_reduction(verdict):
    rng = np.random.default_rng(5)
    p_fail = 0
    for i in range(100):
        n = 2 + i % 11  # n = 2..12
        l = random_instance(rng, n, -50, 50)
        params = MaskParams.for_lmax(n, max(l.lmax, 1))
        if not (verify_p1(l, params) and verify_p2(l, params, path_budget=10_000, seed=i)):
            p_fail += 1
    splice_fail = 0
    for make in (dijkstra_cmp, guarded_bf):
        for _ in range(100):
            n = int(rng.integers(2, 11))
            l = nonneg_instance(rng, n)
            params = MaskParams.for_lmax(n, max(l.lmax, 1))
            direct = run(make(n), params.mask(l)).transcript.relaxations()
            spliced = run(wrap(make(n), params), l).transcript.relaxations()
            splice_fail += direct != spliced
    verdict(
        5,
        "reduction properties",
        p_fail == 0 and splice_fail == 0,
        f"p1/p2 on 100 triples: {p_fail} failures; splicing on 200 runs: {splice_fail} mismatches",
    )


def test_criterion_06_potential_obliviousness(verdict):
    rng = np.random.default_rng(6)
    names = sorted(name for name, cls in STRATEGIES.items() if not (cls.kinds - EDGE_ONLY))
    failures = 0
    for name in names:
        for i in range(100):
            n = int(rng.integers(2, 11))
            l = random_instance(rng, n)
            if i % 2:
                phi = golomb_potential(n)
            else:
                phi = Potential((0,) + tuple(int(x) for x in rng.integers(-100, 101, size=n - 1)))
            failures += not check_potential_oblivious(make_strategy(name, n, seed=i), l, phi)
    verdict(6, "potential-obliviousness", failures == 0, f"{len(names)} strategies x 100 pairs ({', '.join(names)}): {failures} violations")


def test_criterion_07_theorem2_demo(verdict):
    labels = {n: theorem2_demo(guarded_bf(n)).classification for n in (9, 15)}
    dij = [theorem2_demo(dijkstra_cmp(9)) for _ in range(2)]
    stable = dij[0].classification == dij[1].classification and dij[0].duel.transcript == dij[1].duel.transcript
    ok = all(v == "meets-bound" for v in labels.values()) and dij[0].classification in {"incorrect-halt", "meets-bound"} and stable
    verdict(
        7,
        "masked demo",
        ok,
        f"guarded_bf {labels}; dijkstra_cmp n=9 -> {dij[0].classification} after {dij[0].duel.total_ops} ops, stable={stable}",
    )


def test_criterion_08_randomized_bound(verdict):
    details, ok = [], True
    for n in (15, 25):
        stats = experiment("guarded-bf", n, samples=50, seed=0)
        bound = expected_lower_bound(n)
        phases_ok = all(dt >= 0.9 * phase_expectation_bound(n, k) for k, dt in enumerate(stats.mean_dt, start=1))
        full = len(stats.mean_dt) == (n - 1) // 2
        ok &= stats.mean_reduced_cost >= 0.9 * bound and phases_ok and full
        details.append(f"n={n} mean {stats.mean_reduced_cost:.1f} vs 0.9*{bound}, phases ok={phases_ok}")
    verdict(8, "randomized bound (empirical)", ok, "; ".join(details))


def _length(strategy):
    count = 0
    while strategy.next(None) is not None:
        count += 1
    return count


def test_criterion_09_upper_bound_constants(verdict):
    ok, details = True, []
    for n in (15, 25, 41):
        bf, yn = _length(bellman_ford(n)), _length(yen(n))
        ok &= bf == (n - 1) * n * (n - 1) and yn <= 0.5 * n**3 + 5 * n**2
        details.append(f"n={n} |BF|={bf} |Yen|={yn}")
    n = 25
    costs = []
    for seed in range(50):
        pi = sample_permutation(n, np.random.default_rng([9, seed]))
        costs.append(run(bannister_eppstein(n, seed), hard_rand(pi), until_correct=True).reduced_cost)
    mean = float(np.mean(costs))
    ok &= None not in costs and mean <= _length(yen(n))
    details.append(f"bannister_eppstein n=25 mean reduced cost {mean:.1f} = {mean / n**3:.3f} n^3 (reference 1/3)")
    verdict(9, "upper-bound constants", ok, "; ".join(details))


def test_criterion_10_determinism(tmp_path, capsys, verdict):
    save_instance(hard_det([0, 3, 1, 4, 2, 6, 5]), tmp_path / "inst.json")
    commands = [
        ["duel", "--strategy", "guarded-bf", "--n", "15"],
        ["duel", "--strategy", "random-fair", "--n", "9", "--seed", "7", "--check-invariants"],
        ["duel", "--strategy", "dijkstra-cmp", "--n", "9", "--mask"],
        ["yao", "--strategy", "guarded-bf", "--n", "15", "--samples", "50", "--seed", "0"],
        ["yao", "--strategy", "bannister-eppstein", "--n", "11", "--samples", "20", "--seed", "3", "--jobs", "2"],
        ["bench", "--strategy", "bannister-eppstein", "--instance-file", str(tmp_path / "inst.json"), "--seed", "4"],
        ["golomb", "--n", "50"],
        ["formulas", "--n", "25"],
    ]
    differing = []
    for argv in commands:
        outputs = []
        for _ in range(2):
            capsys.readouterr()
            code = main(argv)
            outputs.append((code, capsys.readouterr().out.encode()))
        if outputs[0] != outputs[1] or outputs[0][0] != 0:
            differing.append(" ".join(argv[:2]))
    mask_out = []
    for i in range(2):
        out = tmp_path / f"m{i}.json"
        main(["mask", "--instance-file", str(tmp_path / "inst.json"), "--out", str(out)])
        mask_out.append(out.read_bytes() + (tmp_path / f"m{i}.mask.json").read_bytes())
    if mask_out[0] != mask_out[1]:
        differing.append("mask")
    verdict(10, "determinism", not differing, f"{len(commands) + 1} commands run twice, differing: {differing or 'none'}")
