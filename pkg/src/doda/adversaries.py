"""Interaction sequence generators: the uniform random adversary and the
executable lower-bound constructions (adaptive 3-node and 4-cycle adversaries,
the oblivious sequence against oblivious randomized rules)."""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Optional

import numpy as np

from .engine import SINK, GeneratedSequence, Interaction, InteractionSequence, simulate
from .errors import ConfigurationError


@lru_cache(maxsize=64)
def _pair_tables(n: int):
    # code k -> k-th pair of combinations(range(n), 2)
    a, b = np.array(list(combinations(range(n), 2)), dtype=np.int64).T
    a, b = np.ascontiguousarray(a), np.ascontiguousarray(b)
    a.flags.writeable = False
    b.flags.writeable = False
    return a, b


class RandomStream(GeneratedSequence):
    """Each index is an independent uniform draw over all ``n(n-1)/2`` pairs."""

    def __init__(self, n: int, seed: int, horizon: Optional[int] = None):
        pa, pb = _pair_tables(n)
        m = len(pa)

        def draw(rng, size):
            codes = rng.integers(0, m, size=size, dtype=np.int64)
            return pa[codes], pb[codes]

        super().__init__(n, seed, draw, horizon)


def randomized_stream(n: int, seed: int, horizon: Optional[int] = None) -> RandomStream:
    if n < 3:
        raise ValueError("n must be at least 3")
    return RandomStream(n, seed, horizon)


# -- adaptive adversaries ----------------------------------------------------------

class Theorem1Adversary:
    """Three nodes ``s=0, a=1, b=2``; defeats every deterministic rule.

    Probes with ``{a,b}``; whoever transmits there strands the other. If
    neither does it offers ``{b,s}`` and, if ``b`` takes it, strands ``a``.
    Otherwise the probe repeats.
    """

    n = 3
    S, A, B = 0, 1, 2

    def __init__(self):
        self.phase = "probe"
        self._loop = None
        self._pos = 0

    def _sent_at(self, t, events):
        if events and events[-1].time == t:
            return events[-1].sender
        return None

    def next_interaction(self, t: int, events) -> Interaction:
        S, A, B = self.S, self.A, self.B
        if self._loop is not None:
            pair = self._loop[self._pos % len(self._loop)]
            self._pos += 1
            return pair
        if self.phase == "probe":
            self.phase = "after-probe"
            return Interaction(A, B)
        last = self._sent_at(t - 1, events)
        if self.phase == "after-probe":
            if last == A:
                return self._lock([Interaction(A, S), Interaction(A, B)])
            if last == B:
                return self._lock([Interaction(B, S), Interaction(A, B)])
            self.phase = "after-sink"
            return Interaction(B, S)
        # after-sink
        if last == B:
            return self._lock([Interaction(A, B), Interaction(B, S)])
        self.phase = "after-probe"
        return Interaction(A, B)

    def _lock(self, loop):
        self._loop = loop
        self._pos = 1
        return loop[0]


class Theorem3Adversary:
    """Four nodes on the cycle ``s-u1-u2-u3-s``; defeats rules that know the graph.

    Repeats ``({u1,s}, {u3,s}, {u2,u1}, {u2,u3})`` until ``u2`` sends at the
    third slot (to ``u1``) or the fourth (to ``u3``), then locks into a loop
    that never lets the holder of ``u2``'s data reach the sink.
    """

    n = 4
    PATTERN = (Interaction(1, 0), Interaction(3, 0), Interaction(2, 1), Interaction(2, 3))
    LOCK_U1 = (Interaction(1, 2), Interaction(2, 3), Interaction(3, 0))
    LOCK_U3 = (Interaction(3, 2), Interaction(2, 1), Interaction(1, 0))

    def __init__(self):
        self._slot = 0
        self._loop = None
        self._pos = 0

    def next_interaction(self, t: int, events) -> Interaction:
        if self._loop is not None:
            pair = self._loop[self._pos % len(self._loop)]
            self._pos += 1
            return pair
        if t > 0:
            prev_slot = (self._slot - 1) % 4
            last = events[-1] if events and events[-1].time == t - 1 else None
            if last is not None and last.sender == 2:
                if prev_slot == 2 and last.receiver == 1:
                    self._loop, self._pos = self.LOCK_U1, 1
                    return self.LOCK_U1[0]
                if prev_slot == 3 and last.receiver == 3:
                    self._loop, self._pos = self.LOCK_U3, 1
                    return self.LOCK_U3[0]
        pair = self.PATTERN[self._slot]
        self._slot = (self._slot + 1) % 4
        return pair


def theorem1_adversary() -> Theorem1Adversary:
    return Theorem1Adversary()


def theorem3_adversary() -> Theorem3Adversary:
    return Theorem3Adversary()


# -- oblivious construction against oblivious randomized rules -----------------------

def _u(i: int, n: int) -> int:
    # u_i with indices mod n-1, mapped onto node ids 1..n-1
    return i % (n - 1) + 1


def sink_round_robin(n: int, length: int) -> list:
    """``I^l``: ``{u_i, s}`` for ``i = 0 .. length-1``."""
    return [Interaction(_u(i, n), SINK) for i in range(length)]


def path_block(n: int, d: int) -> list:
    """``I'``: ``{u_i, u_{i+1}}`` for every ``i`` except ``i = d-1``, which meets the sink."""
    block = []
    for i in range(n - 1):
        if i == (d - 1) % (n - 1):
            block.append(Interaction(_u(i, n), SINK))
        else:
            block.append(Interaction(_u(i, n), _u(i + 1, n)))
    return block


def theorem2_sequence(n: int, l0: int, d: int, repetitions: int) -> InteractionSequence:
    """``l0`` sink meetings in round-robin order, then ``repetitions`` path blocks.

    In each block, ``u_d`` can only reach the sink along a path through all
    other nodes. Node ``u_i`` has id ``i + 1``.
    """
    if n < 3:
        raise ConfigurationError("n must be at least 3")
    if not 0 <= d <= n - 2:
        raise ConfigurationError(f"d must be in [0, {n - 2}], got {d}")
    if l0 < 0 or repetitions < 0:
        raise ConfigurationError("l0 and repetitions must be non-negative")
    return InteractionSequence(n, sink_round_robin(n, l0) + path_block(n, d) * repetitions)


def estimate_no_transmit_probability(algorithm, sequence, trials: int, seed: int) -> float:
    """Fraction of independent runs in which nobody transmits."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not algorithm.randomized:
        # one run decides it for a deterministic rule
        trace = simulate(algorithm, sequence, seed=seed)
        return 0.0 if trace.events else 1.0
    root = np.random.SeedSequence(seed)
    silent = 0
    for child in root.spawn(trials):
        trace = simulate(algorithm, sequence, rng=np.random.default_rng(child))
        silent += not trace.events
    return silent / trials


def no_transmit_confidence(p: float, trials: int, z: float = 3.0) -> float:
    """Half-width of a normal-approximation interval for an estimated probability."""
    return z * (max(p * (1 - p), 1.0 / trials) / trials) ** 0.5


def find_l0(algorithm, n: int, trials: int, seed: int, l_cap: int) -> Optional[int]:
    """Smallest ``l <= l_cap`` whose estimated no-transmit probability on ``I^l`` is below ``1/n``.

    ``None`` when no such ``l`` is found.
    """
    for l in range(1, l_cap + 1):
        seq = InteractionSequence(n, sink_round_robin(n, l))
        if estimate_no_transmit_probability(algorithm, seq, trials, seed) < 1.0 / n:
            return l
    return None


def adaptive_cost(algorithm, adversary, horizon: int, seed=None):
    """Co-run against an adaptive adversary and report cost at ``horizon``.

    The realized interactions are only a prefix of an unbounded sequence, so
    a run still going at the horizon yields an undetermined verdict whose
    lower bound grows with the horizon.
    """
    from .engine import simulate_adaptive
    from .oracle import cost_from_ladder, t_ladder
    trace, realized = simulate_adaptive(algorithm, adversary, horizon, seed=seed)
    until = trace.duration if trace.terminated else None
    ladder = t_ladder(realized, until=until)
    return trace, realized, cost_from_ladder(trace.duration, ladder, False, horizon)
