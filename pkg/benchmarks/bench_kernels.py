"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py --n 64 --length 200000 --repeat 3
"""
import argparse
import json
import sys
import time

import numpy as np

from doda._backend import available_backends, meet_time_columns
from doda.adversaries import randomized_stream


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(n, length, seed):
    us, vs = randomized_stream(n, seed).arrays(length)
    mu, mv = meet_time_columns(us, vs, n)
    parent, ptime = np.empty(n, np.int64), np.empty(n, np.int64)

    def aggregate(k, rule):
        def run():
            owns = bytearray(b"\x01") * n
            k.aggregate(us, vs, 0, length, owns, n - 1, rule, length, mu, mv, True)
        return run

    def meet(k):
        def run():
            a, b = np.empty(length, np.int64), np.empty(length, np.int64)
            k.meet_times(us, vs, n, a, b)
        return run

    def ladder(k):
        def run():
            t = 0
            while t < length:
                r = k.opt_search(us, vs, t, n)
                if r < 0:
                    break
                t = r + 1
        return run

    def reverse(k):
        return lambda: k.reverse_broadcast(us, vs, 0, length - 1, n, parent, ptime)

    return {
        "meet_times": meet,
        "aggregate/gathering": lambda k: aggregate(k, 1),
        "aggregate/waiting-greedy": lambda k: aggregate(k, 2),
        "reverse_broadcast": reverse,
        "opt ladder": ladder,
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--length", type=int, default=200_000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="print machine-readable results")
    args = p.parse_args(argv)

    backends = available_backends()
    rows = []
    for name, make in workloads(args.n, args.length, args.seed).items():
        row = {"kernel": name}
        for bname, k in sorted(backends.items()):
            row[bname] = best_of(args.repeat, make(k))
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)

    if args.json:
        json.dump(rows, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 0
    print(f"n={args.n} length={args.length} best of {args.repeat}")
    print(f"{'kernel':<26}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for r in rows:
        cy = f"{r['cython']:.4f}" if "cython" in r else "n/a"
        sp = f"{r['speedup']:.1f}x" if "speedup" in r else "n/a"
        print(f"{r['kernel']:<26}{r['python']:>12.4f}{cy:>12}{sp:>10}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
