"""Command-line runner: duels, benchmarks, randomized experiments and file tools.

Exit status 0 means success with every check passing, 1 a failed
verification, 2 invalid input or an I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .adversary import check_invariants, det_lower_bound, duel
from .core import InstanceError, hard_rand, load_instance, save_instance
from .golomb import erdos_turan_ruler, is_golomb
from .machine import EDGE_ONLY, BudgetExhausted, ModelViolation, Transcript, replay, run
from .reduction import MaskParams, masked_lmax, wrap
from .strategies import STRATEGIES, make_strategy, yen_pass_pairs
from .yao import expected_lower_bound, experiment

OK, FAILED, INVALID = 0, 1, 2
SEED_MAX = 2**64 - 1


class UsageError(ValueError):
    pass


def _strategy_name(text: str) -> str:
    name = text.replace("_", "-")
    if name not in STRATEGIES:
        raise argparse.ArgumentTypeError(f"unknown strategy {text!r}; choose from {', '.join(sorted(STRATEGIES))}")
    return name


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _odd_n(n: int) -> None:
    if n < 3 or n % 2 == 0:
        raise UsageError(f"--n must be odd and at least 3, got {n}")


def emit_report(text: str, path: Optional[str]) -> None:
    """Write ``text`` to ``path``, or to stdout when no path is given."""
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_duel(args) -> int:
    _odd_n(args.n)
    if args.L is not None and args.L < 5 * args.n:
        raise UsageError(f"--L must be at least 5n = {5 * args.n}")
    strategy = make_strategy(args.strategy, args.n, seed=args.seed)
    if strategy.kinds - EDGE_ONLY and not args.mask:
        raise UsageError(f"{args.strategy} uses D- or weight queries; pass --mask to duel it")
    if args.mask:
        strategy = wrap(strategy, MaskParams.for_lmax(args.n, args.L or 5 * args.n))
    result = duel(strategy, args.n, args.L, args.budget)
    doc = result.report()
    ok = result.consistent and (not result.correct or result.total_ops >= result.lower_bound)
    if args.check_invariants:
        inv = check_invariants(result, samples=args.samples, seed=args.seed)
        doc["invariants"] = {
            "checked_completions": inv.checked_completions,
            "checked_interior_steps": inv.checked_interior_steps,
            "violations": [str(v) for v in inv.violations],
        }
        ok = ok and inv.ok
    if args.transcript:
        result.transcript.write(args.transcript)
    emit_report(_dump(doc), args.out)
    return OK if ok else FAILED


def cmd_bench(args) -> int:
    l = load_instance(args.instance_file)
    if l.has_negative_cycle:
        raise UsageError(f"{args.instance_file}: instance has a negative cycle")
    strategy = make_strategy(args.strategy, l.n, seed=args.seed)
    exhausted = False
    try:
        res = run(strategy, l, budget=args.budget)
    except BudgetExhausted as exc:
        res, exhausted = exc.result, True
    doc = {
        "n": l.n,
        "strategy": strategy.name,
        "seed": args.seed,
        "ops": res.ops,
        "reduced_cost": res.reduced_cost,
        "correct": res.correct,
        "halted": res.halted,
        "budget_exhausted": exhausted,
        "distances": list(res.truth),
        "d": list(res.state.d),
    }
    if args.transcript:
        res.transcript.write(args.transcript)
    emit_report(_dump(doc), args.out)
    return OK


def cmd_yao(args) -> int:
    _odd_n(args.n)
    if args.L is not None:
        hard_rand(list(range(args.n)), args.L)  # validates L against the family
    stats = experiment(args.strategy, args.n, args.samples, args.seed, L=args.L, budget=args.budget, jobs=args.jobs)
    emit_report(stats.to_csv(), args.out)
    gated = not (STRATEGIES[args.strategy].kinds - EDGE_ONLY) and args.samples >= 50
    if gated and not stats.mean_reduced_cost >= 0.9 * stats.bound:
        print(f"mean reduced cost {stats.mean_reduced_cost:.3f} < 0.9 * {stats.bound}", file=sys.stderr)
        return FAILED
    return OK


def cmd_golomb(args) -> int:
    marks = erdos_turan_ruler(args.n)
    emit_report("".join(f"{m}\n" for m in marks), None)
    return OK if is_golomb(marks) else FAILED


def cmd_mask(args) -> int:
    l = load_instance(args.instance_file)
    params = MaskParams.for_lmax(l.n, max(l.lmax, 1))
    out = Path(args.out)
    save_instance(params.mask(l), out)
    sidecar = Path(args.params) if args.params else out.with_name(out.stem + ".mask.json")
    sidecar.write_text(_dump(params.to_document()))
    return OK


def cmd_verify(args) -> int:
    l = load_instance(args.instance_file)
    try:
        transcript = Transcript.read(args.transcript)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{args.transcript}: malformed transcript ({exc})") from exc
    for _, op, _ in transcript:
        if op.u == op.v or not all(0 <= x < l.n for x in op):
            raise UsageError(f"{args.transcript}: {op} is not an edge of the instance")
    rep = replay(transcript, l)
    if rep.consistent:
        print(f"consistent: {len(transcript)} steps")
        return OK
    print(f"inconsistent: first mismatch at step {rep.first_mismatch}")
    return FAILED


def cmd_formulas(args) -> int:
    _odd_n(args.n)
    n = args.n
    yen_len = yen_pass_pairs(n) * n * (n - 1)
    lines = [
        ("det_lower_bound", det_lower_bound(n)),
        ("expected_lower_bound", expected_lower_bound(n)),
        ("bellman_ford_length", (n - 1) * n * (n - 1)),
        ("yen_length", yen_len),
        ("golomb_max_mark", max(erdos_turan_ruler(n))),
        ("masked_lmax", masked_lmax(n)),
    ]
    emit_report("".join(f"{k} {v}\n" for k, v in lines), None)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaxlb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("duel", help="play a strategy against the adaptive adversary")
    p.add_argument("--strategy", type=_strategy_name, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=int, default=None, help="chord weight, default 5n")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default=None, help="report path, default stdout")
    p.add_argument("--budget", type=_positive, default=None)
    p.add_argument("--transcript", default=None, help="also write the transcript here")
    p.add_argument("--mask", action="store_true", help="wrap the strategy with the Golomb mask")
    p.add_argument("--check-invariants", action="store_true")
    p.add_argument("--samples", type=_positive, default=20, help="completions per phase boundary")
    p.set_defaults(func=cmd_duel)

    p = sub.add_parser("bench", help="run a strategy on an instance file")
    p.add_argument("--strategy", type=_strategy_name, required=True)
    p.add_argument("--instance-file", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--budget", type=_positive, default=None)
    p.add_argument("--transcript", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("yao", help="sample hard_rand instances and write a CSV")
    p.add_argument("--strategy", type=_strategy_name, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=_positive, default=50)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--L", type=int, default=None, help="chord weight, default 5n^2")
    p.add_argument("--budget", type=_positive, default=None)
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(func=cmd_yao)

    p = sub.add_parser("golomb", help="print an n-mark Golomb ruler")
    p.add_argument("--n", type=_positive, required=True)
    p.set_defaults(func=cmd_golomb)

    p = sub.add_parser("mask", help="mask an instance with a Golomb potential")
    p.add_argument("--instance-file", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--params", default=None, help="sidecar path, default <out>.mask.json")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("verify", help="replay a transcript on an instance")
    p.add_argument("--transcript", required=True)
    p.add_argument("--instance-file", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("formulas", help="print the bounds and sizes for n")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_formulas)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INVALID if exc.code else OK
    try:
        return args.func(args)
    except (UsageError, InstanceError, ModelViolation, ValueError) as exc:
        print(f"relaxlb {args.command}: {exc}", file=sys.stderr)
        return INVALID
    except OSError as exc:
        print(f"relaxlb {args.command}: {exc}", file=sys.stderr)
        return INVALID
    except BudgetExhausted as exc:
        print(f"relaxlb {args.command}: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
