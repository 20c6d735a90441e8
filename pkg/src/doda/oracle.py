"""Offline-optimal aggregation times, the convergecast ladder and the cost functional.

Aggregating every datum to the sink within a window ``[a, b]`` is feasible
exactly when a broadcast from the sink over the same interactions taken in
reverse order (``b`` down to ``a``) reaches every node. The first informing
edges of that reverse broadcast form the aggregation tree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import _backend
from .engine import INF, SINK, TransmissionEvent, sequence_limit, simulate
from .errors import InstanceTooLarge

BRUTE_FORCE_MAX_N = 12
BRUTE_FORCE_MAX_WINDOW = 30


def _columns(sequence, stop):
    us, vs = sequence.arrays(stop)
    return np.ascontiguousarray(us), np.ascontiguousarray(vs)


def broadcast_completion(sequence, source: int, start: int = 0, horizon: Optional[int] = None):
    """Index at which a greedy broadcast from ``source`` (begun at ``start``) informs every node."""
    limit = sequence_limit(sequence, horizon)
    us, vs = _columns(sequence, limit)
    r = _backend.kernels.forward_broadcast(us, vs, start, limit, sequence.n, source)
    return INF if r < 0 else int(r)


def _reverse_tree(sequence, first: int, last: int):
    us, vs = _columns(sequence, last + 1)
    n = sequence.n
    parent = np.empty(n, dtype=np.int64)
    ptime = np.empty(n, dtype=np.int64)
    count = _backend.kernels.reverse_broadcast(us, vs, first, last, n, parent, ptime)
    return count, parent, ptime


def aggregation_feasible(sequence, first: int, last: int) -> bool:
    """Whether all data can reach the sink using only indices ``first..last``."""
    if last < first:
        return False
    count, _, _ = _reverse_tree(sequence, first, last)
    return count == sequence.n


def reverse_broadcast_completion(sequence, first: int, last: int):
    """Window-relative completion of a sink broadcast over ``last, last-1, ..., first``.

    Returns the number of reversed steps minus one needed to inform everyone,
    or ``INF``.
    """
    if last < first:
        return INF
    count, _, ptime = _reverse_tree(sequence, first, last)
    if count != sequence.n:
        return INF
    earliest = min(int(x) for i, x in enumerate(ptime.tolist()) if i != SINK)
    return last - earliest


def opt(sequence, t: int, horizon: Optional[int] = None, method: str = "search"):
    """Earliest end of an aggregation schedule that starts at index ``t``.

    ``method="search"`` doubles then bisects the feasibility predicate;
    ``method="scan"`` tries every end in order. Both return the same value.
    On an unbounded stream with no horizon the search widens until it
    succeeds, so it only returns if aggregation is eventually possible.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if horizon is None and not sequence.finite and sequence.horizon is None:
        limit = INF
    else:
        limit = sequence_limit(sequence, horizon)
    if t >= limit:
        return INF
    if method == "scan":
        if limit == INF:
            raise ValueError("scan needs a finite horizon")
        for end in range(t + sequence.n - 2, limit):
            if aggregation_feasible(sequence, t, end):
                return end
        return INF
    if method != "search":
        raise ValueError(f"unknown method {method!r}")
    n = sequence.n
    kernels = _backend.kernels
    if sequence.finite:
        us, vs = _columns(sequence, limit)
        r = kernels.opt_search(us, vs, t, n)
        return INF if r < 0 else int(r)
    # lazily widen a prefix of the stream; any end found inside a prefix is exact
    span = max(4 * n, 64)
    while True:
        stop = min(limit, t + span)
        us, vs = _columns(sequence, stop)
        r = kernels.opt_search(us, vs, t, n)
        if r >= 0:
            return int(r)
        if stop >= limit:
            return INF
        span *= 2


def successive_convergecasts(sequence, i: int, horizon: Optional[int] = None):
    """``T(i)``: end of ``i`` back-to-back convergecasts (``T(1) = opt(0)``)."""
    if i < 1:
        raise ValueError("i must be at least 1")
    value = -1
    for _ in range(i):
        value = opt(sequence, value + 1, horizon)
        if value == INF:
            return INF
    return value


def t_ladder(sequence, horizon: Optional[int] = None, until=None, max_terms: Optional[int] = None):
    """Successive convergecast ends ``[T(1), T(2), ...]``.

    Stops after the first ``INF``, once a value reaches ``until``, or after
    ``max_terms`` values.
    """
    ladder = []
    value = -1
    while max_terms is None or len(ladder) < max_terms:
        value = opt(sequence, value + 1, horizon)
        ladder.append(value)
        if value == INF or (until is not None and value >= until):
            break
    return ladder


@dataclass
class CostReport:
    """Outcome of :func:`cost`.

    ``determined`` is false when the horizon cut the run short before the
    verdict was settled; ``cost`` is then ``None`` and ``cost_lower_bound``
    holds what is known.
    """
    duration: float
    ladder: list = field(default_factory=list)
    cost: Optional[float] = None
    determined: bool = True
    cost_lower_bound: int = 1
    horizon: Optional[int] = None

    def to_dict(self) -> dict:
        def enc(x):
            return None if x == INF else int(x)
        return {
            "duration": enc(self.duration),
            "ladder": [enc(x) for x in self.ladder],
            "cost": None if self.cost is None else ("inf" if self.cost == INF else int(self.cost)),
            "determined": self.determined,
            "cost_lower_bound": self.cost_lower_bound,
            "horizon": self.horizon,
        }


def cost_from_ladder(run_duration, ladder, complete: bool, horizon=None) -> CostReport:
    """Apply the cost definition to a duration and a computed ladder.

    ``complete`` says the sequence ends within the horizon, so an ``INF`` in
    the ladder or duration is genuine rather than an artifact of truncation.
    """
    for i, value in enumerate(ladder, start=1):
        if value == INF:
            break
        if run_duration <= value:
            return CostReport(run_duration, list(ladder[:i]), i, True, i, horizon)
    finite = [x for x in ladder if x != INF]
    if ladder and ladder[-1] == INF:
        i_max = len(ladder)
        if run_duration != INF:
            # T(i_max) lies beyond the horizon, hence beyond the duration
            return CostReport(run_duration, list(ladder), i_max, True, i_max, horizon)
        if complete:
            return CostReport(run_duration, list(ladder), i_max, True, i_max, horizon)
        return CostReport(run_duration, list(ladder), None, False, i_max, horizon)
    return CostReport(run_duration, list(ladder), None, False, len(finite) + 1, horizon)


def cost(algorithm, sequence, horizon: Optional[int] = None, trace=None, seed=None) -> CostReport:
    """Cost of ``algorithm`` on ``sequence``: smallest ``i`` with ``duration <= T(i)``."""
    limit = sequence_limit(sequence, horizon)
    if trace is None:
        trace = simulate(algorithm, sequence, limit, seed=seed)
    complete = sequence.finite and limit == len(sequence)
    until = trace.duration if trace.terminated else None
    ladder = t_ladder(sequence, limit, until=until)
    return cost_from_ladder(trace.duration, ladder, complete, limit)


# -- exhaustive reference ------------------------------------------------------

def _brute_force(n, pairs):
    full = (1 << n) - 1
    sink_only = 1 << SINK
    length = len(pairs)

    @lru_cache(maxsize=None)
    def best(t, owners):
        # earliest completion index using interactions t.. with `owners` holding data
        if t >= length:
            return INF
        a, b = pairs[t]
        result = best(t + 1, owners)
        if owners >> a & 1 and owners >> b & 1:
            for sender in (a, b):
                if sender == SINK:
                    continue
                rest = owners & ~(1 << sender)
                if rest == sink_only:
                    return t
                result = min(result, best(t + 1, rest))
        return result

    return best(0, full)


def brute_force_opt(sequence, t: int):
    """Exhaustive minimum over every legal schedule of the final transmission index."""
    n = sequence.n
    window = len(sequence) - t
    if n > BRUTE_FORCE_MAX_N or window > BRUTE_FORCE_MAX_WINDOW:
        raise InstanceTooLarge(
            f"brute force limited to n <= {BRUTE_FORCE_MAX_N} and window <= "
            f"{BRUTE_FORCE_MAX_WINDOW} (got n={n}, window={window})")
    if window <= 0:
        return INF
    pairs = tuple(tuple(p) for p in sequence[t:])
    r = _brute_force(n, pairs)
    return INF if r == INF else t + r


def brute_force_feasible(sequence, first: int, last: int) -> bool:
    """Exhaustive check that some legal schedule aggregates within ``first..last``."""
    if last < first:
        return False
    from .engine import InteractionSequence
    window = InteractionSequence(sequence.n, sequence[first:last + 1])
    return brute_force_opt(window, 0) != INF


# -- schedules -------------------------------------------------------------------

def offline_schedule(sequence, t: int, horizon: Optional[int] = None):
    """Transmissions of an optimal aggregation starting at ``t``, or ``None`` if infeasible.

    Built from the first informing edges of the reverse broadcast over
    ``[t, opt(t)]``; child sends to parent at that edge's time.
    """
    end = opt(sequence, t, horizon)
    if end == INF:
        return None
    count, parent, ptime = _reverse_tree(sequence, t, end)
    assert count == sequence.n
    events = [TransmissionEvent(int(ptime[u]), u, int(parent[u]))
              for u in range(sequence.n) if u != SINK]
    events.sort()
    return events


def offline_algorithm():
    """Replays ``offline_schedule(sequence, 0)``; needs the full sequence."""
    from .algorithms import AlgorithmSpec
    from .knowledge import FULL_SEQUENCE

    def setup(view, n):
        schedule = offline_schedule(view.full_sequence(), 0)
        return {} if schedule is None else {e.time: e.receiver for e in schedule}

    def decide(u1, u2, t, ctx):
        return ctx.shared.get(t)

    return AlgorithmSpec("offline", decide, requires=frozenset({FULL_SEQUENCE}), setup=setup)
