"""DODA decision rules.

A rule is called as ``decide(u1, u2, t, ctx)`` with ``u1 < u2`` and returns
the receiver (one of ``u1``/``u2``) or ``None``. ``ctx`` carries the declared
knowledge, the two interacting nodes' memories and a per-run RNG.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .engine import INF, SINK
from .errors import ConfigurationError
from .knowledge import (FULL_SEQUENCE, FUTURE, MEET_TIME, UNDERLYING_GRAPH, bfs_parents,
                        gossip_ready_times, is_tree)


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    decide: Callable
    requires: frozenset = frozenset()
    oblivious: bool = True
    randomized: bool = False
    # per-run derivation from knowledge every node can compute identically
    setup: Optional[Callable] = None
    # (rule id, tau) for the compiled random-stream kernels, if supported
    fast_rule: Optional[tuple] = field(default=None, compare=False)


# -- knowledge-free rules ----------------------------------------------------

def waiting_decide(u1: int, u2: int, t: int, sink: int = SINK):
    """Only a node meeting the sink transmits, to the sink."""
    if u1 == sink:
        return u1
    if u2 == sink:
        return u2
    return None


def gathering_decide(u1: int, u2: int, t: int, sink: int = SINK):
    """Transmit at every opportunity: to the sink if present, else to ``u1``."""
    if u2 == sink:
        return u2
    return u1


def waiting() -> AlgorithmSpec:
    return AlgorithmSpec("waiting", lambda u1, u2, t, ctx: waiting_decide(u1, u2, t),
                         fast_rule=(0, 0))


def gathering() -> AlgorithmSpec:
    return AlgorithmSpec("gathering", lambda u1, u2, t, ctx: gathering_decide(u1, u2, t),
                         fast_rule=(1, 0))


# -- Waiting Greedy ------------------------------------------------------------

def waiting_greedy_choice(u1: int, u2: int, m1, m2, tau):
    """Receiver chosen from the two meet times; ``INF`` compares above everything.

    The node with the later sink meeting transmits, provided that meeting is
    after ``tau``. Ties (including ``INF`` vs ``INF``) go to the first branch.
    """
    if m1 <= m2:
        return u1 if tau < m2 else None
    return u2 if tau < m1 else None


def waiting_greedy_decide(tau: int) -> Callable:
    """Decision rule ``(u1, u2, t, ctx)`` for Waiting Greedy with threshold ``tau``."""
    def decide(u1, u2, t, ctx):
        k = ctx.knowledge
        return waiting_greedy_choice(u1, u2, k.meet_time(u1, t), k.meet_time(u2, t), tau)
    return decide


def waiting_greedy(tau: int) -> AlgorithmSpec:
    if tau is None or tau < 0:
        raise ConfigurationError("waiting-greedy needs a non-negative tau")
    tau = int(tau)
    return AlgorithmSpec("waiting-greedy", waiting_greedy_decide(tau),
                         requires=frozenset({MEET_TIME}), fast_rule=(2, tau))


# -- tree-based rules ----------------------------------------------------------

def _tree_plan(parents: dict, n: int) -> dict:
    children = {u: set() for u in range(n)}
    for c, p in parents.items():
        if p is not None:
            children[p].add(c)
    return {"parent": parents, "children": {u: frozenset(c) for u, c in children.items()}}


def _tree_setup(view, n):
    edges = view.underlying_graph()
    if not is_tree(edges, n):
        raise ConfigurationError("underlying graph is not a tree")
    return _tree_plan(bfs_parents(edges, n), n)


def _spanning_tree_setup(view, n):
    return _tree_plan(bfs_parents(view.underlying_graph(), n), n)


def tree_aggregate_decide(u1: int, u2: int, t: int, ctx):
    """Send to the tree parent once data from every child has arrived."""
    plan = ctx.shared
    parent = plan["parent"]
    if parent.get(u1) == u2:
        child, par = u1, u2
    elif parent.get(u2) == u1:
        child, par = u2, u1
    else:
        return None
    if not (ctx.has_data(child) and ctx.has_data(par)):
        return None
    got = ctx.memory[child].get("received", frozenset())
    if got != plan["children"][child]:
        return None
    mem = ctx.memory[par]
    mem["received"] = mem.get("received", frozenset()) | {child}
    return par


def tree_aggregate() -> AlgorithmSpec:
    return AlgorithmSpec("tree", tree_aggregate_decide, requires=frozenset({UNDERLYING_GRAPH}),
                         oblivious=False, setup=_tree_setup)


def spanning_tree_decide(u1: int, u2: int, t: int, ctx):
    """Tree aggregation along the BFS spanning tree; non-tree edges never carry data."""
    return tree_aggregate_decide(u1, u2, t, ctx)


def spanning_tree() -> AlgorithmSpec:
    return AlgorithmSpec("spanning-tree", spanning_tree_decide,
                         requires=frozenset({UNDERLYING_GRAPH}), oblivious=False,
                         setup=_spanning_tree_setup)


# -- full future knowledge ---------------------------------------------------------

def _rebuild_sequence(known: dict, n: int):
    from .engine import InteractionSequence
    by_time = {}
    for future in known.values():
        for t, pair in future:
            by_time[t] = pair
    times = sorted(by_time)
    if times and times[-1] != len(times) - 1:
        raise AssertionError("union of all futures has gaps")
    return InteractionSequence(n, [by_time[t] for t in times])


def _ready_plan(known: dict, n: int) -> dict:
    """Everything a node derives once it knows every node's future."""
    from .oracle import offline_schedule
    seq = _rebuild_sequence(known, n)
    ready = gossip_ready_times(seq)
    t_star = max(ready)
    schedule = None if t_star == INF else offline_schedule(seq, t_star + 1)
    moves = {} if schedule is None else {e.time: e.receiver for e in schedule}
    return {"t_star": t_star, "moves": moves}


def full_future_decide(u1: int, u2: int, t: int, ctx):
    """Gossip futures until everyone knows the sequence, then replay the optimal schedule."""
    n = ctx.n
    m1, m2 = ctx.memory[u1], ctx.memory[u2]
    for u, m in ((u1, m1), (u2, m2)):
        if "known" not in m:
            m["known"] = {u: ctx.knowledge.future(u)}
    if len(m1["known"]) < n or len(m2["known"]) < n:
        merged = {**m1["known"], **m2["known"]}
        m1["known"] = merged
        m2["known"] = dict(merged)
    for m in (m1, m2):
        if "plan" not in m and len(m["known"]) == n:
            m["plan"] = _ready_plan(m["known"], n)
    plan = m1.get("plan")
    if plan is None or m2.get("plan") is None or t <= plan["t_star"]:
        return None
    return plan["moves"].get(t)


def full_future() -> AlgorithmSpec:
    return AlgorithmSpec("full-future", full_future_decide, requires=frozenset({FUTURE}),
                         oblivious=False)


# -- test-registry extras --------------------------------------------------------

def never_transmit() -> AlgorithmSpec:
    return AlgorithmSpec("never", lambda u1, u2, t, ctx: None)


def coin_waiting(p: float = 0.5) -> AlgorithmSpec:
    """Randomized Waiting: on a sink meeting, transmit with probability ``p``."""
    def decide(u1, u2, t, ctx):
        if u1 == SINK and ctx.rng.random() < p:
            return u1
        return None
    return AlgorithmSpec("coin-waiting", decide, randomized=True)


ALGORITHM_NAMES = ("waiting", "gathering", "waiting-greedy", "tree", "spanning-tree",
                   "full-future", "offline")


def get_algorithm(name: str, tau: Optional[int] = None) -> AlgorithmSpec:
    """Look an algorithm up by its registry name."""
    if name == "waiting-greedy":
        if tau is None:
            raise ConfigurationError("waiting-greedy requires --tau")
        return waiting_greedy(tau)
    if name == "offline":
        from .oracle import offline_algorithm
        return offline_algorithm()
    factories = {
        "waiting": waiting,
        "gathering": gathering,
        "tree": tree_aggregate,
        "spanning-tree": spanning_tree,
        "full-future": full_future,
        "never": never_transmit,
        "coin-waiting": coin_waiting,
    }
    try:
        return factories[name]()
    except KeyError:
        raise ConfigurationError(
            f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHM_NAMES)}") from None
