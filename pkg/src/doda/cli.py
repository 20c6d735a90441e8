"""``doda`` command line: simulate, bench, oracle, adversary, cost, fit, calibrate.

Exit codes: 0 success, 1 usage or configuration error, 2 verdict undetermined
at the given horizon.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import defaultdict

from .algorithms import ALGORITHM_NAMES, get_algorithm
from .engine import INF, read_sequence, simulate, simulate_adaptive, write_sequence
from .errors import DodaError

EXIT_OK, EXIT_USAGE, EXIT_UNDETERMINED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _horizon(text):
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("horizon must be an integer or 'auto'") from None


def _enc(x):
    return None if x == INF else int(x)


def _dump(obj):
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_simulate(args):
    seq = read_sequence(args.seq)
    algorithm = get_algorithm(args.algo, args.tau)
    trace = simulate(algorithm, seq, args.horizon, seed=args.seed)
    out = trace.to_dict()
    if not args.trace:
        out["transmissions"] = len(out.pop("events"))
    _dump(out)
    return EXIT_OK


def cmd_cost(args):
    from .oracle import cost
    seq = read_sequence(args.seq)
    report = cost(get_algorithm(args.algo, args.tau), seq, args.horizon, seed=args.seed)
    _dump({"algo": args.algo, **report.to_dict()})
    return EXIT_OK if report.determined else EXIT_UNDETERMINED


def cmd_oracle(args):
    from . import oracle
    seq = read_sequence(args.seq)
    if args.op == "opt":
        _dump({"op": "opt", "t": args.t, "value": _enc(oracle.opt(seq, args.t, args.horizon))})
    elif args.op == "T":
        value = oracle.successive_convergecasts(seq, args.i, args.horizon)
        _dump({"op": "T", "i": args.i, "value": _enc(value)})
    elif args.op == "schedule":
        sched = oracle.offline_schedule(seq, args.t, args.horizon)
        _dump({"op": "schedule", "t": args.t, "feasible": sched is not None,
               "events": [] if sched is None else
               [{"t": e.time, "sender": e.sender, "receiver": e.receiver} for e in sched]})
    else:
        if not args.algo:
            raise DodaError("--op cost needs --algo")
        report = oracle.cost(get_algorithm(args.algo, args.tau), seq, args.horizon)
        _dump({"op": "cost", "algo": args.algo, **report.to_dict()})
        if not report.determined:
            return EXIT_UNDETERMINED
    return EXIT_OK


def cmd_adversary(args):
    from . import adversaries
    fam = args.family
    if fam == "random":
        if args.n is None or args.horizon is None:
            raise DodaError("--family random needs --n and --horizon")
        seq = adversaries.randomized_stream(args.n, args.seed).prefix(args.horizon)
    elif fam == "theorem2":
        if None in (args.n, args.l0, args.d, args.reps):
            raise DodaError("--family theorem2 needs --n, --l0, --d and --reps")
        seq = adversaries.theorem2_sequence(args.n, args.l0, args.d, args.reps)
    else:
        if not args.algo or args.horizon is None:
            raise DodaError(f"--family {fam} co-runs an algorithm: pass --algo and --horizon")
        adv = adversaries.theorem1_adversary() if fam == "theorem1" else adversaries.theorem3_adversary()
        trace, seq = simulate_adaptive(get_algorithm(args.algo, args.tau), adv, args.horizon, seed=args.seed)
        sys.stderr.write(f"{args.algo}: terminated={trace.terminated} "
                         f"transmissions={len(trace.events)} over {len(seq)} interactions\n")
    write_sequence(seq, args.out)
    return EXIT_OK


def cmd_bench(args):
    from .harness import ExperimentConfig, emit, run_trials, summarize
    fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
    cfg = ExperimentConfig(args.algo, args.n, args.trials, seed=args.seed, tau=args.tau,
                           tau_c=args.tau_c, horizon=args.horizon, with_cost=args.with_cost,
                           out=args.out, fmt=fmt)
    records = run_trials(cfg, args.workers)
    emit(records, fmt, args.out)
    stats = summarize(records)
    if args.summary:
        emit(stats, "json", args.summary)
    for s in stats:
        mean = "n/a" if s.mean is None else f"{s.mean:.2f}"
        extra = "" if s.by_tau_fraction is None else f" by_tau={s.by_tau_fraction:.3f}"
        sys.stderr.write(f"{s.algo} n={s.n} trials={s.trials} mean={mean} "
                         f"terminated={s.terminated_fraction:.3f}{extra}\n")
    return EXIT_OK


def cmd_fit(args):
    from .harness import fit_nlogn, fit_power_law, records_from_csv, summarize
    with open(args.input, encoding="utf-8") as fh:
        records = records_from_csv(fh.read())
    groups = defaultdict(list)
    for r in records:
        groups[r.algo].append(r)
    fit = fit_power_law if args.model == "power" else fit_nlogn
    out = []
    for algo in sorted(groups):
        points = [(s.n, s.mean) for s in summarize(groups[algo]) if s.mean is not None]
        res = fit(points)
        out.append({"algo": algo, "model": res.model, "exponent": res.exponent,
                    "coefficient": res.coefficient, "residual": res.residual,
                    "points": [[n, m] for n, m in points]})
    _dump(out)
    return EXIT_OK


def cmd_calibrate(args):
    from .harness import calibrate
    if args.algo != "waiting-greedy":
        raise DodaError("calibration is only defined for waiting-greedy")
    res = calibrate(args.n, args.target, args.c, args.trials, args.seed, args.workers)
    _dump({"n": res.n, "target": res.target,
           "fractions": {str(c): f for c, f in res.fractions.items()}, "chosen_c": res.chosen})
    return EXIT_OK if res.chosen is not None else EXIT_UNDETERMINED


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="doda", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    algo_help = "one of: " + ", ".join(ALGORITHM_NAMES)

    s = sub.add_parser("simulate", help="run one algorithm over a sequence file")
    s.add_argument("--algo", required=True, help=algo_help)
    s.add_argument("--tau", type=int)
    s.add_argument("--seq", required=True)
    s.add_argument("--horizon", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--trace", action="store_true", help="include every transmission")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("cost", help="cost of an algorithm on a sequence file")
    s.add_argument("--algo", required=True, help=algo_help)
    s.add_argument("--tau", type=int)
    s.add_argument("--seq", required=True)
    s.add_argument("--horizon", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_cost)

    s = sub.add_parser("oracle", help="offline optimum, ladder, cost or schedule")
    s.add_argument("--seq", required=True)
    s.add_argument("--op", required=True, choices=["opt", "T", "cost", "schedule"])
    s.add_argument("--t", type=int, default=0)
    s.add_argument("--i", type=int, default=1)
    s.add_argument("--algo")
    s.add_argument("--tau", type=int)
    s.add_argument("--horizon", type=int)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("adversary", help="write an adversarial or random sequence file")
    s.add_argument("--family", required=True, choices=["random", "theorem1", "theorem2", "theorem3"])
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--l0", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--reps", type=int)
    s.add_argument("--horizon", type=int)
    s.add_argument("--algo")
    s.add_argument("--tau", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_adversary)

    s = sub.add_parser("bench", help="Monte Carlo trials on uniform random streams")
    s.add_argument("--algo", required=True, help=algo_help)
    s.add_argument("--n", type=_int_list, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tau", type=int)
    s.add_argument("--tau-c", type=float)
    s.add_argument("--horizon", type=_horizon, default="auto")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--with-cost", action="store_true")
    s.add_argument("--format", choices=["csv", "json"])
    s.add_argument("--summary", help="also write per-n summary statistics (json)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("fit", help="fit a scaling model to bench output")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--model", choices=["power", "nlogn"], default="power")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("calibrate", help="smallest tau constant reaching a termination target")
    s.add_argument("--algo", default="waiting-greedy")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--target", type=float, default=0.9)
    s.add_argument("--c", type=_float_list, default=[1.0, 2.0, 4.0])
    s.add_argument("--trials", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DodaError, ValueError, OSError) as exc:
        sys.stderr.write(f"doda {args.command}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
