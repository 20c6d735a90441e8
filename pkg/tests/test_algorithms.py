import random

import pytest

from doda.algorithms import (ALGORITHM_NAMES, gathering, gathering_decide, get_algorithm,
                             spanning_tree, tree_aggregate, waiting, waiting_decide, waiting_greedy,
                             waiting_greedy_choice)
from doda.engine import INF, InteractionSequence, ReadOnlyMemory, simulate
from doda.errors import ConfigurationError, KnowledgeError, MemoryWriteError
from doda.oracle import cost, opt

from conftest import random_sequence


def test_waiting_examples():
    assert waiting_decide(0, 1, 5) == 0
    assert waiting_decide(1, 2, 5) is None
    assert waiting_decide(0, 2, 5) == 0


def test_gathering_examples(s3):
    assert gathering_decide(1, 2, 0) == 1
    assert gathering_decide(0, 2, 0) == 0
    assert simulate(gathering(), s3).duration == 1


@pytest.mark.parametrize("m1, m2, tau, expected", [
    (4, 7, 5, 1),
    (4, 3, 5, None),
    (INF, INF, 5, 1),
    (9, INF, 5, 1),
    (INF, 9, 5, 2),
    (3, 3, 5, None),
    (6, 6, 5, 1),
])
def test_waiting_greedy_choice(m1, m2, tau, expected):
    assert waiting_greedy_choice(1, 2, m1, m2, tau) == expected


def test_waiting_greedy_on_s3(s3):
    trace = simulate(waiting_greedy(0), s3)
    assert [tuple(e) for e in trace.events] == [(0, 2, 1), (1, 1, 0)]
    assert trace.duration == 1


def test_waiting_greedy_beyond_horizon_only_moves_stranded_data():
    # with tau past the end, a sender never meets the sink again
    from doda.knowledge import meet_time
    rng = random.Random(5)
    for _ in range(30):
        seq = random_sequence(rng, rng.randint(3, 6), 50)
        trace = simulate(waiting_greedy(len(seq) + 1), seq)
        for e in trace.events:
            assert meet_time(seq, e.sender, e.time) == INF


def test_waiting_greedy_needs_tau():
    with pytest.raises(ConfigurationError):
        get_algorithm("waiting-greedy")
    with pytest.raises(ConfigurationError):
        waiting_greedy(-1)


def test_tree_example():
    seq = InteractionSequence(3, [(0, 1), (1, 2), (0, 1)])
    trace = simulate(tree_aggregate(), seq)
    assert [tuple(e) for e in trace.events] == [(1, 2, 1), (2, 1, 0)]
    assert trace.duration == 2


def test_tree_rejects_non_tree(s3):
    with pytest.raises(ConfigurationError):
        simulate(tree_aggregate(), s3)


def test_spanning_tree_examples(s3):
    periodic = InteractionSequence(3, [(1, 2), (0, 1), (0, 2)] * 3)
    trace = simulate(spanning_tree(), periodic)
    assert all(tuple(sorted((e.sender, e.receiver))) != (1, 2) for e in trace.events)
    assert trace.duration == 2
    with pytest.raises(ConfigurationError):
        simulate(spanning_tree(), InteractionSequence(4, [(0, 1), (2, 3)]))


def test_full_future_examples(s3, s3_twice):
    alone = simulate(get_algorithm("full-future"), s3)
    assert alone.events == [] and alone.duration == INF
    assert cost(get_algorithm("full-future"), s3).cost == 2
    twice = simulate(get_algorithm("full-future"), s3_twice)
    assert [tuple(e) for e in twice.events] == [(3, 2, 1), (4, 1, 0)]
    stranded = InteractionSequence(3, [(1, 2), (0, 2), (0, 2), (0, 2)])
    assert simulate(get_algorithm("full-future"), stranded).events == []


def test_offline_realizes_opt():
    rng = random.Random(8)
    for _ in range(60):
        seq = random_sequence(rng, rng.randint(3, 7), rng.randint(1, 50))
        trace = simulate(get_algorithm("offline"), seq)
        assert trace.duration == opt(seq, 0)


def test_oblivious_rules_get_read_only_memory(s3):
    from doda.algorithms import AlgorithmSpec

    def scribble(u1, u2, t, ctx):
        ctx.memory[u1]["x"] = 1
        return None

    with pytest.raises(MemoryWriteError):
        simulate(AlgorithmSpec("scribble", scribble), s3)
    with pytest.raises(MemoryWriteError):
        ReadOnlyMemory().update(a=1)


def test_undeclared_knowledge_is_refused(s3):
    from doda.algorithms import AlgorithmSpec
    peek = AlgorithmSpec("peek", lambda u1, u2, t, ctx: ctx.knowledge.meet_time(u1, t))
    with pytest.raises(KnowledgeError):
        simulate(peek, s3)


def test_oblivious_prefix_consistency():
    # re-running a prefix yields identical decisions
    rng = random.Random(21)
    for _ in range(20):
        seq = random_sequence(rng, 5, 80)
        for name in ("waiting", "gathering"):
            full = simulate(get_algorithm(name), seq).events
            head = simulate(get_algorithm(name), seq.prefix(40)).events
            assert head == [e for e in full if e.time < 40]


def test_registry():
    for name in ALGORITHM_NAMES:
        spec = get_algorithm(name, tau=3)
        assert spec.name == name
    with pytest.raises(ConfigurationError):
        get_algorithm("nope")


def test_coin_waiting_is_seeded(s3):
    a = simulate(get_algorithm("coin-waiting"), s3, seed=4)
    b = simulate(get_algorithm("coin-waiting"), s3, seed=4)
    assert a.events == b.events
