"""Monte Carlo experiments over uniform random interaction streams."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .adversaries import randomized_stream
from .algorithms import get_algorithm
from .engine import INF, simulate
from .errors import ConfigurationError
from .oracle import cost as cost_of, opt

CSV_FIELDS = ("algo", "n", "seed", "trial", "duration", "terminated", "cost")
FAST_ALGOS = ("waiting", "gathering", "waiting-greedy", "offline")
MAX_WIDENINGS = 3


def tau_formula(n: int, c: float) -> int:
    """Waiting Greedy threshold ``c * n^1.5 * sqrt(ln n)``, floored."""
    return int(math.floor(c * n ** 1.5 * math.sqrt(math.log(n))))


def auto_horizon(n: int, tau: Optional[int] = None) -> int:
    return max(20 * n * n, 10 * (tau or 0))


def trial_seed(base_seed: int, n: int, trial: int) -> int:
    """Per-trial seed hashed from ``(base_seed, n, trial)``."""
    state = np.random.SeedSequence([base_seed, n, trial]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


@dataclass
class ExperimentConfig:
    algo: str
    ns: Sequence[int]
    trials: int
    seed: int = 0
    tau: Optional[int] = None
    tau_c: Optional[float] = None
    horizon: object = "auto"
    with_cost: bool = False
    out: Optional[str] = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if any(n < 3 for n in self.ns):
            raise ConfigurationError("every n must be at least 3")
        if self.algo == "waiting-greedy" and self.tau is None and self.tau_c is None:
            self.tau_c = 2.0
        if self.horizon != "auto" and int(self.horizon) < 1:
            raise ConfigurationError("horizon must be positive")
        for n in self.ns:
            tau = self.tau_for(n)
            if tau is not None and self.horizon != "auto" and int(self.horizon) < tau:
                raise ConfigurationError(f"horizon {self.horizon} is below tau={tau} for n={n}")

    def tau_for(self, n: int) -> Optional[int]:
        if self.algo != "waiting-greedy":
            return None
        if self.tau is not None:
            return int(self.tau)
        return tau_formula(n, self.tau_c)

    def horizon_for(self, n: int) -> int:
        if self.horizon == "auto":
            return auto_horizon(n, self.tau_for(n))
        return int(self.horizon)


@dataclass
class TrialRecord:
    algo: str
    n: int
    seed: int
    trial: int
    duration: Optional[int]
    terminated: bool
    by_tau: Optional[bool] = None
    cost: Optional[int] = None
    horizon: Optional[int] = None


# -- fast single-trial drivers over random streams ----------------------------------

def _fast_oblivious(stream, n, rule, tau, horizon, kernels):
    owns = bytearray(b"\x01") * n
    remaining = n - 1
    if rule != 2:
        empty = np.empty(0, dtype=np.int64)
        start, stop = 0, min(horizon, 2 * n * n)
        while True:
            us, vs = stream.arrays(stop)
            status, remaining = kernels.aggregate(us, vs, start, stop, owns, remaining,
                                                  rule, 0, empty, empty, True)
            if status >= 0:
                return int(status)
            if stop >= horizon:
                return None
            start, stop = stop, min(horizon, 2 * stop)
    # Waiting Greedy: read ahead only as far as the meet times require
    stop = min(horizon, tau + 2 * n * n)
    start = 0
    while True:
        us, vs = stream.arrays(stop)
        mu, mv = _backend.meet_time_columns(us, vs, n, kernels)
        resolved = stop >= horizon
        status, remaining = kernels.aggregate(us, vs, start, stop, owns, remaining,
                                              rule, tau, mu, mv, resolved)
        if status >= 0:
            return int(status)
        if status == -1:
            return None
        start = -2 - status
        stop = min(horizon, 2 * stop)


def fast_duration(algo: str, n: int, seed: int, horizon: int, tau: Optional[int] = None,
                  kernels=None) -> Optional[int]:
    """Duration of one run on ``randomized_stream(n, seed)``; ``None`` if not done by ``horizon``."""
    kernels = kernels or _backend.kernels
    stream = randomized_stream(n, seed, horizon)
    if algo == "offline":
        value = opt(stream, 0)
        return None if value == INF else int(value)
    rule = {"waiting": 0, "gathering": 1, "waiting-greedy": 2}[algo]
    if rule == 2 and tau is None:
        raise ConfigurationError("waiting-greedy requires tau")
    return _fast_oblivious(stream, n, rule, tau or 0, horizon, kernels)


def run_trial(config: ExperimentConfig, n: int, trial: int) -> TrialRecord:
    seed = trial_seed(config.seed, n, trial)
    tau = config.tau_for(n)
    horizon = config.horizon_for(n)
    widen = MAX_WIDENINGS if config.horizon == "auto" else 0
    while True:
        if config.algo in FAST_ALGOS:
            d = fast_duration(config.algo, n, seed, horizon, tau)
            trace = None
        else:
            algorithm = get_algorithm(config.algo, tau)
            trace = simulate(algorithm, randomized_stream(n, seed, horizon), horizon)
            d = int(trace.duration) if trace.terminated else None
        if d is not None or widen == 0:
            break
        widen -= 1
        horizon *= 2
    rec = TrialRecord(config.algo, n, seed, trial, d, d is not None, horizon=horizon)
    if tau is not None:
        rec.by_tau = d is not None and d <= tau
    if config.with_cost:
        algorithm = get_algorithm(config.algo, tau)
        report = cost_of(algorithm, randomized_stream(n, seed, horizon), horizon, trace=trace)
        rec.cost = None if report.cost in (None, INF) else int(report.cost)
    return rec


def run_trials(config: ExperimentConfig, workers: int = 1) -> list:
    """All trials of ``config``, in canonical ``(n, trial)`` order."""
    jobs = [(n, k) for n in sorted(config.ns) for k in range(config.trials)]
    if workers <= 1:
        return [run_trial(config, n, k) for n, k in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        records = list(pool.map(lambda job: run_trial(config, *job), jobs))
    records.sort(key=lambda r: (r.n, r.trial))
    return records


# -- statistics -----------------------------------------------------------------------

@dataclass
class SummaryStats:
    algo: str
    n: int
    trials: int
    terminated_fraction: float
    mean: Optional[float]
    variance: Optional[float]
    q50: Optional[float]
    q95: Optional[float]
    q99: Optional[float]
    by_tau_fraction: Optional[float] = None


def summarize(records) -> list:
    """Per-``n`` sample statistics; unterminated runs only count toward the fraction."""
    records = list(records)
    if not records:
        raise ValueError("cannot summarize an empty record list")
    algos = {r.algo for r in records}
    if len(algos) != 1:
        raise ValueError(f"records mix algorithms {sorted(algos)}")
    out = []
    for n in sorted({r.n for r in records}):
        group = [r for r in records if r.n == n]
        done = np.array([r.duration for r in group if r.terminated], dtype=float)
        stats = SummaryStats(
            algo=group[0].algo, n=n, trials=len(group),
            terminated_fraction=len(done) / len(group),
            mean=None, variance=None, q50=None, q95=None, q99=None)
        if len(done):
            stats.mean = float(done.mean())
            stats.variance = float(done.var(ddof=1)) if len(done) > 1 else 0.0
            stats.q50, stats.q95, stats.q99 = (float(q) for q in np.quantile(done, [0.5, 0.95, 0.99]))
        flags = [r.by_tau for r in group if r.by_tau is not None]
        if flags:
            stats.by_tau_fraction = sum(flags) / len(flags)
        out.append(stats)
    return out


@dataclass
class FitResult:
    model: str
    exponent: float
    coefficient: float
    residual: float


def fit_power_law(points) -> FitResult:
    """Least-squares line through ``(log n, log y)``; residual is the RMS log error."""
    points = list(points)
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    ns = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if (ns <= 0).any() or (ys <= 0).any():
        raise ValueError("power-law fit needs positive values")
    x, y = np.log(ns), np.log(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return FitResult("power", float(slope), float(math.exp(intercept)),
                     float(math.sqrt(np.mean(resid ** 2))))


def fit_nlogn(points) -> FitResult:
    """Fit ``y = a * n ln n``; the coefficient is the geometric-mean ratio."""
    points = list(points)
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    ns = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if (ns <= 1).any() or (ys <= 0).any():
        raise ValueError("n log n fit needs n > 1 and positive values")
    logs = np.log(ys) - np.log(ns * np.log(ns))
    a = logs.mean()
    return FitResult("n-log-n", 1.0, float(math.exp(a)),
                     float(math.sqrt(np.mean((logs - a) ** 2))))


# -- output ------------------------------------------------------------------------------

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(value)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow([_cell(getattr(r, f)) for f in CSV_FIELDS])
    return buf.getvalue()


def records_from_csv(text: str) -> list:
    rows = csv.DictReader(io.StringIO(text))
    out = []
    for row in rows:
        out.append(TrialRecord(
            algo=row["algo"], n=int(row["n"]), seed=int(row["seed"]), trial=int(row["trial"]),
            duration=int(row["duration"]) if row["duration"] else None,
            terminated=row["terminated"] == "1",
            cost=int(row["cost"]) if row["cost"] else None))
    return out


def to_json(items) -> str:
    return json.dumps([asdict(x) for x in items], indent=2) + "\n"


def records_from_json(text: str) -> list:
    return [TrialRecord(**row) for row in json.loads(text)]


def emit(items, fmt: str, path) -> None:
    """Write records (csv or json) or summary stats (json) to ``path``."""
    if fmt == "csv":
        if items and not isinstance(items[0], TrialRecord):
            raise ValueError("csv output is only defined for trial records")
        text = records_to_csv(items)
    elif fmt == "json":
        text = to_json(items)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- calibration -----------------------------------------------------------------------

@dataclass
class CalibrationResult:
    n: int
    target: float
    fractions: dict = field(default_factory=dict)
    chosen: Optional[float] = None


def calibrate(n: int, target: float = 0.9, constants=(1.0, 2.0, 4.0), trials: int = 500,
              seed: int = 0, workers: int = 1) -> CalibrationResult:
    """Smallest ``c`` whose Waiting Greedy run finishes by ``tau`` in at least ``target`` of trials."""
    result = CalibrationResult(n, target)
    for c in sorted(constants):
        cfg = ExperimentConfig("waiting-greedy", [n], trials, seed=seed, tau_c=c)
        records = run_trials(cfg, workers)
        frac = sum(bool(r.by_tau) for r in records) / len(records)
        result.fractions[c] = frac
        if result.chosen is None and frac >= target:
            result.chosen = c
    return result
