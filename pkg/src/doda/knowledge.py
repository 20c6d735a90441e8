"""Knowledge functions a node may be granted about the interaction sequence."""
from __future__ import annotations

from bisect import bisect_right
from collections import defaultdict, deque
from typing import Optional

from . import _backend
from .engine import INF, SINK, Interaction, sequence_limit
from .errors import ConfigurationError, KnowledgeError

MEET_TIME = "meet_time"
FUTURE = "future"
UNDERLYING_GRAPH = "underlying_graph"
FULL_SEQUENCE = "full_sequence"
KNOWLEDGE_KINDS = frozenset({MEET_TIME, FUTURE, UNDERLYING_GRAPH, FULL_SEQUENCE})


def _sink_meetings(sequence, limit):
    """Sorted sink-meeting times per node over the first ``limit`` indices."""
    us, vs = sequence.arrays(limit)
    meetings = defaultdict(list)
    for t in (us == SINK).nonzero()[0].tolist():
        meetings[int(vs[t])].append(t)
    return meetings


def meet_time(sequence, u: int, t: int, horizon: Optional[int] = None):
    """Next index ``t' > t`` at which ``u`` meets the sink; ``t`` for the sink itself.

    Returns ``INF`` when no such meeting exists within the sequence/horizon.
    """
    if u == SINK:
        return t
    limit = sequence_limit(sequence, horizon)
    times = _sink_meetings(sequence, limit).get(u, [])
    i = bisect_right(times, t)
    return times[i] if i < len(times) else INF


def future_of(sequence, u: int, horizon: Optional[int] = None) -> list:
    """All ``(t, interaction)`` involving ``u``, in increasing ``t``."""
    limit = sequence_limit(sequence, horizon)
    us, vs = sequence.arrays(limit)
    hits = ((us == u) | (vs == u)).nonzero()[0].tolist()
    return [(t, Interaction(int(us[t]), int(vs[t]))) for t in hits]


def underlying_graph(sequence, horizon: Optional[int] = None) -> frozenset:
    """Distinct canonical pairs appearing at least once."""
    limit = sequence_limit(sequence, horizon)
    us, vs = sequence.arrays(limit)
    return frozenset(Interaction(a, b) for a, b in set(zip(us.tolist(), vs.tolist())))


def is_tree(edges, n: int) -> bool:
    """True iff ``edges`` connects all ``n`` nodes with exactly ``n - 1`` edges."""
    edges = {Interaction(*e) for e in edges}
    if len(edges) != n - 1:
        return False
    return len(_reachable(edges, n, SINK)) == n


def _reachable(edges, n, root):
    adj = adjacency(edges, n)
    seen = {root}
    todo = deque([root])
    while todo:
        x = todo.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return seen


def adjacency(edges, n: int) -> list:
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    for nbrs in adj:
        nbrs.sort()
    return adj


def bfs_parents(edges, n: int, root: int = SINK) -> dict:
    """BFS tree from ``root`` exploring neighbours in ascending id order.

    Raises ``ConfigurationError`` if some node is unreachable.
    """
    adj = adjacency(edges, n)
    parent = {root: None}
    todo = deque([root])
    while todo:
        x = todo.popleft()
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                todo.append(y)
    if len(parent) != n:
        missing = sorted(set(range(n)) - parent.keys())
        raise ConfigurationError(f"underlying graph is disconnected; unreachable nodes {missing}")
    return parent


def gossip_ready_times(sequence, horizon: Optional[int] = None) -> list:
    """Per node, the first index after which it has heard from every node.

    Both endpoints of an interaction merge everything they know. ``INF``
    for nodes that never complete within the sequence.
    """
    limit = sequence_limit(sequence, horizon)
    us, vs = sequence.arrays(limit)
    n = sequence.n
    full = (1 << n) - 1
    known = [1 << u for u in range(n)]
    ready = [INF] * n
    pending = n
    for t, (a, b) in enumerate(zip(us.tolist(), vs.tolist())):
        merged = known[a] | known[b]
        known[a] = known[b] = merged
        if merged == full:
            for x in (a, b):
                if ready[x] == INF:
                    ready[x] = t
                    pending -= 1
            if pending == 0:
                break
    return ready


class KnowledgeBundle:
    """Lazily computed, cached knowledge over the first ``horizon`` indices."""

    def __init__(self, sequence, horizon: int):
        self.sequence = sequence
        self.horizon = horizon
        self._meetings = None
        self._futures = None
        self._edges = None
        self._full = None

    def check(self, requires) -> None:
        unknown = set(requires) - KNOWLEDGE_KINDS
        if unknown:
            raise ConfigurationError(f"unknown knowledge kinds {sorted(unknown)}")
        if requires and self.sequence.horizon is None:
            raise ConfigurationError(
                f"knowledge {sorted(requires)} needs a sequence with a horizon cap")

    def view(self, requires) -> "KnowledgeView":
        self.check(requires)
        return KnowledgeView(self, frozenset(requires))

    def meet_time(self, u: int, t: int):
        if u == SINK:
            return t
        if self._meetings is None:
            self._meetings = _sink_meetings(self.sequence, self.horizon)
        times = self._meetings.get(u, ())
        i = bisect_right(times, t)
        return times[i] if i < len(times) else INF

    def future(self, u: int) -> list:
        if self._futures is None:
            us, vs = self.sequence.arrays(self.horizon)
            futures = [[] for _ in range(self.sequence.n)]
            for t, (a, b) in enumerate(zip(us.tolist(), vs.tolist())):
                p = Interaction(a, b)
                futures[a].append((t, p))
                futures[b].append((t, p))
            self._futures = [tuple(f) for f in futures]
        return self._futures[u]

    def underlying_graph(self) -> frozenset:
        if self._edges is None:
            self._edges = underlying_graph(self.sequence, self.horizon)
        return self._edges

    def full_sequence(self):
        if self._full is None:
            seq = self.sequence
            self._full = seq if seq.finite and self.horizon == len(seq) else seq.prefix(self.horizon)
        return self._full

    def meet_time_columns(self):
        """Per-index meet times of both endpoints, ``-1`` when none in range."""
        us, vs = self.sequence.arrays(self.horizon)
        return _backend.meet_time_columns(us, vs, self.sequence.n)


class KnowledgeView:
    """Read access restricted to the knowledge a rule declared."""

    __slots__ = ("_bundle", "requires")

    def __init__(self, bundle: KnowledgeBundle, requires: frozenset):
        self._bundle = bundle
        self.requires = requires

    def _need(self, kind):
        if kind not in self.requires:
            raise KnowledgeError(f"knowledge {kind!r} was not declared")

    @property
    def n(self) -> int:
        return self._bundle.sequence.n

    def meet_time(self, u: int, t: int):
        self._need(MEET_TIME)
        return self._bundle.meet_time(u, t)

    def future(self, u: int) -> list:
        self._need(FUTURE)
        return self._bundle.future(u)

    def underlying_graph(self) -> frozenset:
        self._need(UNDERLYING_GRAPH)
        return self._bundle.underlying_graph()

    def full_sequence(self):
        self._need(FULL_SEQUENCE)
        return self._bundle.full_sequence()
