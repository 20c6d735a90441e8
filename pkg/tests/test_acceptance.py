"""Acceptance criteria 1-12, one PASS/FAIL line each.

Run with pytest (lines are collected into the terminal summary) or directly
with ``python tests/test_acceptance.py``.
"""
import math
import random
import sys
import time
from functools import lru_cache
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE, S3_TEXT, random_sequence  # noqa: E402

from doda.adversaries import adaptive_cost, randomized_stream, theorem1_adversary, theorem3_adversary
from doda.algorithms import full_future, gathering, spanning_tree, tree_aggregate, waiting
from doda.engine import INF, Interaction, InteractionSequence, parse_sequence, simulate
from doda.harness import (ExperimentConfig, calibrate, fit_power_law, records_to_csv, run_trials,
                          summarize, tau_formula, to_json)
from doda.knowledge import bfs_parents
from doda.oracle import (aggregation_feasible, broadcast_completion, brute_force_feasible,
                         brute_force_opt, cost, opt)

SEED = 2024
CALIBRATION_SEED = 7


def verdict(number, title, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def harmonic(k):
    return sum(1.0 / i for i in range(1, k + 1))


@lru_cache(maxsize=None)
def means(algo, ns, trials, seed=SEED, tau_c=None):
    records = run_trials(ExperimentConfig(algo, list(ns), trials, seed=seed, tau_c=tau_c))
    return {s.n: s for s in summarize(records)}


def test_01_oracle_equivalence():
    start = time.perf_counter()
    rng = random.Random(SEED)
    checked = mismatches = 0
    cases = [parse_sequence(S3_TEXT)]
    while len(cases) < 201:
        cases.append(random_sequence(rng, rng.choice((3, 4, 5)), rng.randint(0, 12)))
    for seq in cases:
        for t in range(len(seq) + 1):
            checked += 1
            mismatches += opt(seq, t) != brute_force_opt(seq, t)
    s3 = cases[0]
    s3_ok = [opt(s3, t) for t in range(4)] == [1, 2, INF, INF]
    elapsed = time.perf_counter() - start
    verdict(1, "opt == brute_force_opt", mismatches == 0 and s3_ok and elapsed < 10,
            f"{len(cases)} instances, {checked} (seq, t) pairs, {mismatches} mismatches, {elapsed:.2f}s")


def test_02_reversal_duality():
    rng = random.Random(SEED + 1)
    mismatches = 0
    for _ in range(500):
        n = rng.randint(3, 6)
        seq = random_sequence(rng, n, rng.randint(1, 24))
        first = rng.randrange(len(seq))
        last = rng.randrange(first, min(len(seq), first + 16))
        # sink broadcast over the window read backwards
        rev = InteractionSequence(n, [seq[k] for k in range(last, first - 1, -1)])
        by_broadcast = broadcast_completion(rev, 0) != INF
        by_search = brute_force_feasible(seq, first, last)
        mismatches += (by_broadcast != by_search) + (aggregation_feasible(seq, first, last) != by_search)
    verdict(2, "aggregation feasible == reversed-window broadcast", mismatches == 0,
            f"500 windows, {mismatches} mismatches")


def test_03_gathering_mean():
    start = time.perf_counter()
    got = means("gathering", (10, 32), 10_000)
    elapsed = time.perf_counter() - start
    errs = {n: got[n].mean / (n - 1) ** 2 - 1 for n in (10, 32)}
    ok = all(abs(e) <= 0.03 for e in errs.values()) and elapsed < 30
    verdict(3, "Gathering mean ~ (n-1)^2", ok,
            f"n=10 mean {got[10].mean:.2f} vs 81 ({errs[10]:+.2%}); "
            f"n=32 mean {got[32].mean:.1f} vs 961 ({errs[32]:+.2%}); {elapsed:.1f}s")


def test_04_waiting_mean():
    got = means("waiting", (10,), 10_000)[10].mean
    target = 45 * harmonic(9)
    err = got / target - 1
    verdict(4, "Waiting mean ~ 45*H_9", abs(err) <= 0.03, f"mean {got:.2f} vs {target:.2f} ({err:+.2%})")


def test_05_offline_mean():
    got = means("offline", (10,), 10_000)[10].mean
    target = 9 * harmonic(9)
    err = got / target - 1
    ratios = {n: means("offline", (16, 32, 64), 2000)[n].mean / (n * math.log(n)) for n in (16, 32, 64)}
    centre = sum(ratios.values()) / 3
    spread = max(abs(r / centre - 1) for r in ratios.values())
    ok = abs(err) <= 0.05 and spread <= 0.15
    verdict(5, "offline opt(0) mean ~ 9*H_9 and Theta(n ln n)", ok,
            f"n=10 mean {got:.2f} vs {target:.2f} ({err:+.2%}); mean/(n ln n) "
            + ", ".join(f"{n}:{r:.3f}" for n, r in ratios.items()) + f"; max deviation {spread:.1%}")


def test_06_scaling_exponents():
    ns = (8, 16, 32, 64, 128)
    g = means("gathering", ns, 2000)
    w = means("waiting", ns, 2000)
    eg = fit_power_law([(n, g[n].mean) for n in ns]).exponent
    ew = fit_power_law([(n, w[n].mean) for n in ns]).exponent
    ratios = [w[n].mean / g[n].mean for n in ns]
    increasing = all(a < b for a, b in zip(ratios, ratios[1:]))
    ok = abs(eg - 2.0) <= 0.10 and ew >= eg and increasing
    verdict(6, "log-log exponents", ok,
            f"Gathering {eg:.4f}, Waiting {ew:.4f}, W/G ratios " + ", ".join(f"{r:.2f}" for r in ratios))


def test_07_waiting_greedy():
    chosen = []
    for n in (64, 128):
        res = calibrate(n, 0.9, (1.0, 2.0, 4.0), trials=500, seed=CALIBRATION_SEED)
        chosen.append(res.chosen)
    c = None if None in chosen else max(chosen)
    if c is None:
        verdict(7, "Waiting Greedy terminates by tau", False, f"no c in {{1,2,4}} calibrated: {chosen}")
    wg = means("waiting-greedy", (64, 128), 2000, tau_c=c)
    fractions = {n: wg[n].by_tau_fraction for n in (64, 128)}
    g128 = means("gathering", (8, 16, 32, 64, 128), 2000)[128].mean
    ok = all(f >= 0.9 for f in fractions.values()) and wg[128].mean < g128
    verdict(7, "Waiting Greedy terminates by tau", ok,
            f"c={c:g} (tau at n=128: {tau_formula(128, c)}); by-tau fraction "
            + ", ".join(f"n={n}:{f:.3f}" for n, f in fractions.items())
            + f"; mean at 128 WG {wg[128].mean:.0f} < Gathering {g128:.0f}")


def test_08_impossibility_constructions():
    parts = []
    ok = True
    for label, algo, make in (("thm1/gathering", gathering, theorem1_adversary),
                              ("thm1/waiting", waiting, theorem1_adversary),
                              ("thm3/gathering", gathering, theorem3_adversary)):
        bounds = []
        for horizon in (50_000, 100_000):
            trace, _, rep = adaptive_cost(algo(), make(), horizon)
            finite = [v for v in rep.ladder if v != INF]
            ok &= not trace.terminated and not rep.determined and len(finite) >= 1
            bounds.append(rep.cost_lower_bound)
        ok &= bounds[1] >= 10_000 and bounds[1] > bounds[0]
        parts.append(f"{label} cost>={bounds[1]} (>= {bounds[0]} at 5e4)")
    verdict(8, "adaptive adversaries defeat knowledge-free rules", ok, "; ".join(parts))


def _random_tree(rng, n):
    return [Interaction(v, rng.randrange(v)) for v in range(1, n)]


def test_09_tree_optimality():
    rng = random.Random(SEED + 9)
    done = mismatches = 0
    while done < 100:
        n = rng.randint(3, 8)
        edges = _random_tree(rng, n)
        seq = InteractionSequence(n, [rng.choice(edges) for _ in range(rng.randint(n - 1, 60))])
        if opt(seq, 0) == INF:
            continue  # resample until the instance is feasible
        done += 1
        mismatches += simulate(tree_aggregate(), seq).duration != opt(seq, 0)
    verdict(9, "tree aggregation duration == opt(0)", mismatches == 0,
            f"100 feasible tree instances, {mismatches} mismatches")


def test_10_spanning_tree_liveness():
    rng = random.Random(SEED + 10)
    late = 0
    for _ in range(100):
        n = rng.randint(3, 9)
        edges = set(_random_tree(rng, n))
        for _ in range(rng.randint(0, n)):
            a, b = rng.sample(range(n), 2)
            edges.add(Interaction(a, b))
        period = sorted(edges)
        rng.shuffle(period)
        seq = InteractionSequence(n, period * n)
        trace = simulate(spanning_tree(), seq)
        late += not (trace.terminated and trace.duration < n * len(period))
    verdict(10, "spanning tree terminates within n*period", late == 0,
            f"100 periodic sequences, {late} late or unterminated")


def test_11_full_future_cost():
    worst = 0
    undetermined = 0
    for k in range(100):
        n = (5, 10)[k % 2]
        horizon = 20 * n * n
        rep = cost(full_future(), randomized_stream(n, SEED * 1000 + k, horizon), horizon)
        undetermined += not rep.determined
        worst = max(worst, (rep.cost or math.inf) / n)
    s3 = cost(full_future(), parse_sequence(S3_TEXT))
    ok = undetermined == 0 and worst <= 1 and s3.cost is not None and s3.cost <= 3
    verdict(11, "cost(full_future) <= n", ok,
            f"100 streams, worst cost/n {worst:.2f}, {undetermined} undetermined; S3 cost {s3.cost}")


def test_12_determinism_and_io():
    cfg = ExperimentConfig("waiting-greedy", [16, 24], 200, seed=SEED)
    runs = [run_trials(cfg, w) for w in (1, 1, 4)]
    csv_same = len({records_to_csv(r) for r in runs}) == 1
    json_same = len({to_json(r) for r in runs}) == 1
    rng = random.Random(SEED + 12)
    round_trips = 0
    for _ in range(100):
        seq = random_sequence(rng, rng.randint(3, 12), rng.randint(0, 50))
        round_trips += parse_sequence(seq.to_text()) == seq and parse_sequence(seq.to_text()).to_text() == seq.to_text()
    ok = csv_same and json_same and round_trips == 100
    verdict(12, "byte-identical output and lossless sequence files", ok,
            f"csv identical {csv_same}, json identical {json_same} over workers 1/1/4; "
            f"{round_trips}/100 sequence round-trips")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
