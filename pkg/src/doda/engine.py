"""Interaction-sequence model and the transmit-once execution engine.

A dynamic graph is a node count ``n`` plus a sequence of pairwise
interactions; the position of an interaction in the sequence is its time.
Node 0 is the sink. Every node starts with one datum and may send it at most
once; a node that has sent can no longer receive.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, ContractViolation, SequenceParseError

SINK = 0
INF = math.inf

Decision = Optional[int]


class _Pair(NamedTuple):
    a: int
    b: int


class Interaction(_Pair):
    """Unordered pair of distinct nodes, stored with the smaller id first."""

    __slots__ = ()

    def __new__(cls, u: int, v: int):
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop interaction ({u}, {v})")
        if u < 0 or v < 0:
            raise ValueError(f"negative node id in ({u}, {v})")
        return super().__new__(cls, min(u, v), max(u, v))

    def other(self, u: int) -> int:
        if u == self.a:
            return self.b
        if u == self.b:
            return self.a
        raise ValueError(f"node {u} is not part of {tuple(self)}")


class TransmissionEvent(NamedTuple):
    time: int
    sender: int
    receiver: int


class InteractionSequence:
    """Finite, immutable interaction sequence."""

    finite = True

    def __init__(self, n: int, pairs: Iterable, sink: int = SINK):
        if n < 3:
            raise ValueError(f"need at least 3 nodes, got n={n}")
        if sink != SINK:
            raise ValueError("the sink must be node 0")
        self.n = int(n)
        self.sink = sink
        items = tuple(p if isinstance(p, Interaction) else Interaction(*p) for p in pairs)
        for t, p in enumerate(items):
            if p.b >= self.n:
                raise ValueError(f"node id {p.b} out of range at index {t} (n={n})")
        self._pairs = items
        us = np.fromiter((p.a for p in items), dtype=np.int64, count=len(items))
        vs = np.fromiter((p.b for p in items), dtype=np.int64, count=len(items))
        us.flags.writeable = False
        vs.flags.writeable = False
        self._us, self._vs = us, vs

    @classmethod
    def from_arrays(cls, n: int, us, vs) -> "InteractionSequence":
        return cls(n, zip(np.asarray(us).tolist(), np.asarray(vs).tolist()))

    @property
    def horizon(self) -> int:
        return len(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __getitem__(self, t):
        if isinstance(t, slice):
            return self._pairs[t]
        return self._pairs[t]

    def __iter__(self) -> Iterator[Interaction]:
        return iter(self._pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, InteractionSequence):
            return NotImplemented
        return self.n == other.n and self._pairs == other._pairs

    def __hash__(self) -> int:
        return hash((self.n, self._pairs))

    def __repr__(self) -> str:
        body = ", ".join(f"({p.a},{p.b})" for p in self._pairs[:8])
        more = ", ..." if len(self._pairs) > 8 else ""
        return f"InteractionSequence(n={self.n}, [{body}{more}])"

    def __add__(self, other: "InteractionSequence") -> "InteractionSequence":
        if self.n != other.n:
            raise ValueError("cannot concatenate sequences over different node sets")
        return InteractionSequence(self.n, self._pairs + tuple(other))

    def arrays(self, stop: Optional[int] = None):
        """Endpoint columns ``(us, vs)`` of the first ``stop`` interactions."""
        if stop is None or stop >= len(self._pairs):
            return self._us, self._vs
        return self._us[:stop], self._vs[:stop]

    def prefix(self, stop: int) -> "InteractionSequence":
        return InteractionSequence(self.n, self._pairs[:stop])

    def to_text(self) -> str:
        lines = [f"n {self.n} sink {self.sink}"]
        lines.extend(f"{p.a} {p.b}" for p in self._pairs)
        return "\n".join(lines) + "\n"


class GeneratedSequence:
    """Lazily materialized, deterministic interaction stream.

    ``draw(rng, size)`` must return two int64 arrays of canonical endpoints.
    Blocks are always drawn with the same size so the stream does not depend
    on how far or in which order it is read.
    """

    finite = False
    BLOCK = 4096

    def __init__(self, n: int, seed: int, draw: Callable, horizon: Optional[int] = None):
        if n < 3:
            raise ValueError(f"need at least 3 nodes, got n={n}")
        self.n = int(n)
        self.sink = SINK
        self.seed = int(seed)
        self.horizon = None if horizon is None else int(horizon)
        self._draw = draw
        self._rng = np.random.default_rng(self.seed)
        self._us = np.empty(0, dtype=np.int64)
        self._vs = np.empty(0, dtype=np.int64)
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, seed={self.seed}, horizon={self.horizon})"

    def __len__(self) -> int:
        if self.horizon is None:
            raise TypeError("unbounded stream has no length")
        return self.horizon

    def _ensure(self, stop: int) -> None:
        if stop <= len(self._us):
            return
        with self._lock:
            have = len(self._us)
            if stop <= have:
                return
            nblocks = -(-(stop - have) // self.BLOCK)
            new_us, new_vs = [self._us], [self._vs]
            for _ in range(nblocks):
                us, vs = self._draw(self._rng, self.BLOCK)
                new_us.append(us)
                new_vs.append(vs)
            us = np.concatenate(new_us)
            vs = np.concatenate(new_vs)
            us.flags.writeable = False
            vs.flags.writeable = False
            self._vs = vs
            self._us = us

    def _cap(self, stop: Optional[int]) -> int:
        if stop is None:
            if self.horizon is None:
                raise ConfigurationError("unbounded stream needs an explicit stop")
            return self.horizon
        if self.horizon is not None:
            return min(stop, self.horizon)
        return stop

    def arrays(self, stop: Optional[int] = None):
        stop = self._cap(stop)
        self._ensure(stop)
        us, vs = self._us, self._vs
        return us[:stop], vs[:stop]

    def __getitem__(self, t: int) -> Interaction:
        if t < 0 or (self.horizon is not None and t >= self.horizon):
            raise IndexError(t)
        self._ensure(t + 1)
        return Interaction(int(self._us[t]), int(self._vs[t]))

    def __iter__(self) -> Iterator[Interaction]:
        t = 0
        while self.horizon is None or t < self.horizon:
            yield self[t]
            t += 1

    def prefix(self, stop: int) -> InteractionSequence:
        us, vs = self.arrays(stop)
        return InteractionSequence.from_arrays(self.n, us, vs)


def sequence_limit(sequence, horizon: Optional[int] = None) -> int:
    """Number of indices of ``sequence`` usable under an optional horizon."""
    cap = sequence.horizon
    if horizon is None:
        if cap is None:
            raise ConfigurationError("an unbounded stream needs an explicit horizon")
        return cap
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    return horizon if cap is None else min(horizon, cap)


# -- file format -------------------------------------------------------------

def parse_sequence(text: str) -> InteractionSequence:
    """Parse the text sequence format (``n <N> sink 0`` header, one pair per line)."""
    lines = text.splitlines()
    header_at = None
    for i, raw in enumerate(lines, start=1):
        if raw.strip() and not raw.lstrip().startswith("#"):
            header_at = i
            break
    if header_at is None:
        raise SequenceParseError("missing header 'n <N> sink 0'", line=1)
    head = lines[header_at - 1].split()
    if len(head) != 4 or head[0] != "n" or head[2] != "sink":
        raise SequenceParseError("malformed header, expected 'n <N> sink 0'", line=header_at)
    try:
        n, sink = int(head[1]), int(head[3])
    except ValueError:
        raise SequenceParseError("non-integer value in header", line=header_at) from None
    if n < 3:
        raise SequenceParseError(f"n must be at least 3, got {n}", line=header_at)
    if sink != SINK:
        raise SequenceParseError("sink must be node 0", line=header_at)

    pairs = []
    for lineno in range(header_at + 1, len(lines) + 1):
        raw = lines[lineno - 1].strip()
        if not raw or raw.startswith("#"):
            continue
        parts = raw.split()
        if len(parts) != 2:
            raise SequenceParseError(f"expected two node ids, got {raw!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise SequenceParseError(f"non-integer node id in {raw!r}", line=lineno) from None
        if u == v:
            raise SequenceParseError(f"self-loop ({u}, {v})", line=lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise SequenceParseError(f"node id out of range in ({u}, {v}) for n={n}", line=lineno)
        pairs.append(Interaction(u, v))
    return InteractionSequence(n, pairs)


def read_sequence(path) -> InteractionSequence:
    with open(path, encoding="utf-8") as fh:
        return parse_sequence(fh.read())


def write_sequence(sequence: InteractionSequence, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(sequence.to_text())


# -- execution state ---------------------------------------------------------

@dataclass(frozen=True)
class ExecutionState:
    owns_data: frozenset
    transmitted: frozenset
    clock: int = 0

    @classmethod
    def initial(cls, n: int) -> "ExecutionState":
        return cls(frozenset(range(n)), frozenset(), 0)


def apply_decision(state: ExecutionState, interaction, decision: Decision) -> ExecutionState:
    """Apply one decision to ``state`` and advance the clock by one."""
    a, b = interaction
    if decision is not None and decision not in (a, b):
        raise ContractViolation(f"receiver {decision} is not part of interaction ({a}, {b})")
    owns = state.owns_data
    if decision is None or a not in owns or b not in owns:
        return ExecutionState(owns, state.transmitted, state.clock + 1)
    sender = b if decision == a else a
    if sender == SINK:
        raise ContractViolation("the sink never transmits")
    return ExecutionState(owns - {sender}, state.transmitted | {sender}, state.clock + 1)


@dataclass
class ExecutionTrace:
    n: int
    events: list = field(default_factory=list)
    terminated: bool = False
    duration: float = INF
    algo: str = ""
    seed: Optional[int] = None
    horizon: Optional[int] = None

    def to_dict(self) -> dict:
        out = {"algo": self.algo, "n": self.n}
        if self.seed is not None:
            out["seed"] = self.seed
        out["events"] = [{"t": e.time, "sender": e.sender, "receiver": e.receiver} for e in self.events]
        out["terminated"] = self.terminated
        out["duration"] = None if self.duration == INF else int(self.duration)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExecutionTrace":
        events = [TransmissionEvent(e["t"], e["sender"], e["receiver"]) for e in data["events"]]
        duration = INF if data["duration"] is None else int(data["duration"])
        return cls(n=data["n"], events=events, terminated=data["terminated"],
                   duration=duration, algo=data.get("algo", ""), seed=data.get("seed"))


def duration(trace: ExecutionTrace):
    """Index of the final transmission, or ``INF`` when the run did not terminate."""
    return trace.duration


def replay(trace: ExecutionTrace, sequence) -> ExecutionState:
    """Re-apply the trace's transmissions through :func:`apply_decision`."""
    by_time = {}
    for e in trace.events:
        if sequence[e.time] != Interaction(e.sender, e.receiver):
            raise ContractViolation(f"event at t={e.time} does not match interaction {tuple(sequence[e.time])}")
        by_time[e.time] = e.receiver
    state = ExecutionState.initial(trace.n)
    stop = trace.horizon if trace.horizon is not None else (
        trace.events[-1].time + 1 if trace.events else 0)
    for t in range(stop):
        state = apply_decision(state, sequence[t], by_time.get(t))
    return state


# -- simulation --------------------------------------------------------------

class ReadOnlyMemory(dict):
    """Node memory handed to oblivious rules; every write raises."""

    def _reject(self, *args, **kwargs):
        from .errors import MemoryWriteError
        raise MemoryWriteError("oblivious decision rules cannot write node memory")

    __setitem__ = __delitem__ = _reject
    update = setdefault = pop = popitem = clear = _reject


_EMPTY_MEMORY = ReadOnlyMemory()


class RunContext:
    """What a decision rule sees besides ``(u1, u2, t)``."""

    __slots__ = ("n", "sink", "knowledge", "rng", "shared", "memory", "_owns")

    def __init__(self, n, knowledge, rng, shared, owns):
        self.n = n
        self.sink = SINK
        self.knowledge = knowledge
        self.rng = rng
        self.shared = shared
        self.memory = {}
        self._owns = owns

    def is_sink(self, u: int) -> bool:
        return u == SINK

    def has_data(self, u: int) -> bool:
        return bool(self._owns[u])


def simulate(algorithm, sequence, horizon: Optional[int] = None, seed=None, rng=None) -> ExecutionTrace:
    """Run ``algorithm`` over ``sequence`` until termination or ``horizon``.

    Interacting nodes are handed to the rule ordered by ascending id. Oblivious
    rules are only consulted when both endpoints still own data; other rules
    see every interaction so they can update memory.
    """
    from .knowledge import KnowledgeBundle

    if horizon is None:
        horizon = sequence.horizon
        if horizon is None:
            raise ConfigurationError("an unbounded stream needs an explicit horizon")
    elif sequence.finite and horizon > len(sequence):
        raise ConfigurationError(
            f"horizon {horizon} exceeds the sequence length {len(sequence)}")
    if rng is None:
        rng = np.random.default_rng(seed)

    n = sequence.n
    bundle = KnowledgeBundle(sequence, horizon)
    view = bundle.view(algorithm.requires)
    shared = algorithm.setup(view, n) if algorithm.setup is not None else None
    owns = bytearray(b"\x01") * n
    ctx = RunContext(n, view, rng, shared, owns)
    if algorithm.oblivious:
        memories = None
        ctx.memory = {}
    else:
        memories = [dict() for _ in range(n)]

    us, vs = sequence.arrays(horizon)
    us, vs = us.tolist(), vs.tolist()
    decide = algorithm.decide
    events = []
    remaining = n - 1
    trace = ExecutionTrace(n=n, algo=algorithm.name, seed=seed, horizon=horizon)
    for t in range(len(us)):
        a, b = us[t], vs[t]
        both = owns[a] and owns[b]
        if memories is None:
            if not both:
                continue
            ctx.memory = {a: _EMPTY_MEMORY, b: _EMPTY_MEMORY}
        else:
            ctx.memory = {a: memories[a], b: memories[b]}
        r = decide(a, b, t, ctx)
        if r is None:
            continue
        if r != a and r != b:
            raise ContractViolation(
                f"{algorithm.name}: receiver {r} is not part of interaction ({a}, {b}) at t={t}")
        if not both:
            continue
        sender = b if r == a else a
        if sender == SINK:
            raise ContractViolation(f"{algorithm.name}: the sink was told to transmit at t={t}")
        owns[sender] = 0
        events.append(TransmissionEvent(t, sender, r))
        remaining -= 1
        if remaining == 0:
            trace.terminated = True
            trace.duration = t
            break
    trace.events = events
    return trace


def simulate_adaptive(algorithm, adversary, horizon: int, seed=None, rng=None):
    """Co-run ``algorithm`` with an adaptive adversary for ``horizon`` steps.

    Before index ``t`` the adversary is asked for the next interaction given
    the transmissions so far. Returns ``(trace, realized_sequence)``. Only
    knowledge-free rules can be driven this way, since the future does not
    exist yet.
    """
    if algorithm.requires:
        raise ConfigurationError(
            f"{algorithm.name} needs {sorted(algorithm.requires)}, which an adaptive adversary cannot provide")
    if rng is None:
        rng = np.random.default_rng(seed)
    n = adversary.n
    owns = bytearray(b"\x01") * n
    shared = algorithm.setup(None, n) if algorithm.setup is not None else None
    ctx = RunContext(n, None, rng, shared, owns)
    memories = None if algorithm.oblivious else [dict() for _ in range(n)]
    decide = algorithm.decide
    events = []
    pairs = []
    remaining = n - 1
    trace = ExecutionTrace(n=n, algo=algorithm.name, seed=seed, horizon=horizon)
    for t in range(horizon):
        a, b = adversary.next_interaction(t, events)
        pairs.append(Interaction(a, b))
        both = owns[a] and owns[b]
        if memories is None:
            if not both:
                continue
            ctx.memory = {a: _EMPTY_MEMORY, b: _EMPTY_MEMORY}
        else:
            ctx.memory = {a: memories[a], b: memories[b]}
        r = decide(a, b, t, ctx)
        if r is None:
            continue
        if r != a and r != b:
            raise ContractViolation(f"{algorithm.name}: receiver {r} not in ({a}, {b})")
        if not both:
            continue
        sender = b if r == a else a
        if sender == SINK:
            raise ContractViolation(f"{algorithm.name}: the sink was told to transmit at t={t}")
        owns[sender] = 0
        events.append(TransmissionEvent(t, sender, r))
        remaining -= 1
        if remaining == 0:
            trace.terminated = True
            trace.duration = t
            break
    trace.events = events
    return trace, InteractionSequence(n, pairs)
