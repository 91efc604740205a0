"""Contention-graph tests: hand-traced peeling, a brute-force closure oracle,
confluence under shuffled processing order, and bookkeeping invariants.
"""

import io
import pickle
import random

import pytest

from frameless_aloha import ContentionGraph, ParameterError


def naive_closure(n_users, slots):
    """Reference peeling: rescan every slot until no unerased slot holds
    exactly one unresolved user.  O(users * slots^2), used as oracle only.

    `slots` is a list of (participants, erased) pairs.
    """
    resolved = set()
    changed = True
    while changed:
        changed = False
        for participants, erased in slots:
            if erased:
                continue
            residual = [u for u in set(participants) if u not in resolved]
            if len(residual) == 1:
                resolved.add(residual[0])
                changed = True
    return resolved


def random_instance(rng, max_users=12, max_slots=18, erasure=0.0):
    n_users = rng.randint(1, max_users)
    n_slots = rng.randint(0, max_slots)
    slots = []
    for _ in range(n_slots):
        degree = rng.randint(0, min(4, n_users))
        participants = rng.sample(range(n_users), degree)
        slots.append((participants, rng.random() < erasure))
    return n_users, slots


def build(n_users, slots):
    graph = ContentionGraph(n_users)
    for participants, erased in slots:
        graph.add_slot(participants, erased=erased)
    return graph


class TestHandTraces:
    def test_three_user_cascade(self):
        # slots {u0,u1}, {u0,u2}, {u0,u2}, {u1}: the lone singleton starts a
        # cascade that resolves everyone, one user per cycle
        graph = ContentionGraph(3)
        for participants in ([0, 1], [0, 2], [0, 2], [1]):
            graph.add_slot(participants)
        assert list(graph.peel_stepwise()) == [1, 1, 1]
        assert graph.resolved_users() == {0, 1, 2}
        assert graph.resolution_slot[1] == 3  # resolved by the singleton slot
        assert graph.replica_count == [3, 2, 2]

    def test_stopping_set_resolves_nothing(self):
        graph = ContentionGraph(2)
        graph.add_slot([0, 1])
        graph.add_slot([0, 1])
        assert graph.peel() == 0
        assert graph.resolved_users() == set()

    def test_erased_singleton_resolves_nothing(self):
        graph = ContentionGraph(1)
        graph.add_slot([0], erased=True)
        assert graph.peel() == 0
        assert graph.resolved_count == 0

    def test_chain_peels_one_per_cycle(self):
        # slot k holds users {k, k+1}; final slot holds the last user alone.
        # Each cycle frees exactly the next link of the chain.
        k = 7
        graph = ContentionGraph(k)
        for i in range(k - 1):
            graph.add_slot([i, i + 1])
        graph.add_slot([k - 1])
        assert list(graph.peel_stepwise()) == [1] * k

    def test_empty_graph(self):
        graph = ContentionGraph(4)
        assert list(graph.peel_stepwise()) == []
        assert graph.peel() == 0

    def test_duplicate_participants_collapse_to_one_edge(self):
        graph = ContentionGraph(2)
        graph.add_slot([1, 1])
        assert graph.peel() == 1
        assert graph.resolved_users() == {1}

    def test_add_slot_after_resolution_cancels_known_users(self):
        graph = ContentionGraph(2)
        graph.add_slot([0])
        assert graph.peel() == 1
        # user 0 is already resolved, so this new slot is a singleton on 1
        graph.add_slot([0, 1])
        assert graph.peel() == 1
        assert graph.resolved_users() == {0, 1}


class TestAgainstNaiveOracle:
    def test_matches_closure_on_random_graphs(self):
        rng = random.Random(20240901)
        for _ in range(300):
            n_users, slots = random_instance(rng)
            graph = build(n_users, slots)
            graph.peel()
            assert graph.resolved_users() == naive_closure(n_users, slots)

    def test_matches_closure_with_erasures(self):
        rng = random.Random(4242)
        for _ in range(300):
            n_users, slots = random_instance(rng, erasure=0.3)
            graph = build(n_users, slots)
            graph.peel()
            assert graph.resolved_users() == naive_closure(n_users, slots)


class TestConfluence:
    def test_resolved_set_independent_of_processing_order(self):
        rng = random.Random(99)
        for trial in range(120):
            n_users, slots = random_instance(rng, erasure=0.15)
            reference = build(n_users, slots)
            reference.peel()
            shuffled = build(n_users, slots)
            shuffled.peel(rng=random.Random(trial))
            assert shuffled.resolved_users() == reference.resolved_users()

    def test_cycle_totals_agree_under_shuffling(self):
        rng = random.Random(3)
        n_users, slots = random_instance(rng, max_users=10, max_slots=16)
        counts = list(build(n_users, slots).peel_stepwise())
        again = list(build(n_users, slots).peel_stepwise(rng=random.Random(8)))
        assert sum(counts) == sum(again)


class TestInvariants:
    def test_erasure_is_monotone_harmful(self):
        # flipping any single slot to erased never enlarges the resolved set
        rng = random.Random(17)
        for _ in range(60):
            n_users, slots = random_instance(rng, max_users=8, max_slots=10)
            base = build(n_users, slots)
            base.peel()
            full = base.resolved_users()
            for k in range(len(slots)):
                flipped = [(p, e or i == k) for i, (p, e) in enumerate(slots)]
                graph = build(n_users, flipped)
                graph.peel()
                assert graph.resolved_users() <= full

    def test_replica_sum_equals_edge_count(self):
        rng = random.Random(5)
        n_users, slots = random_instance(rng, max_users=10, max_slots=20)
        graph = build(n_users, slots)
        graph.peel()
        assert sum(graph.replica_count) == graph.total_edges
        assert graph.total_edges == sum(len(set(p)) for p, _ in slots)

    def test_resolved_count_tracks_set(self):
        graph = ContentionGraph(3)
        graph.add_slot([0])
        graph.add_slot([1, 2])
        graph.peel()
        assert graph.resolved_count == len(graph.resolved_users()) == 1

    def test_rejects_out_of_range_users(self):
        graph = ContentionGraph(3)
        with pytest.raises(ParameterError):
            graph.add_slot([3])
        with pytest.raises(ParameterError):
            graph.add_slot([-1])
        with pytest.raises(ParameterError):
            ContentionGraph(0)


class TestSerialization:
    def test_edge_list_and_dump(self):
        graph = ContentionGraph(3)
        graph.add_slot([2, 0])
        graph.add_slot([1])
        assert graph.edge_list() == [(0, 0), (2, 0), (1, 1)]
        buf = io.StringIO()
        graph.dump_edges(buf)
        assert buf.getvalue() == "0 0\n2 0\n1 1\n"

    def test_pickle_round_trip_preserves_behaviour(self):
        rng = random.Random(11)
        n_users, slots = random_instance(rng, max_users=10, max_slots=14)
        graph = build(n_users, slots)
        clone = pickle.loads(pickle.dumps(graph))
        graph.peel()
        clone.peel()
        assert clone.resolved_users() == graph.resolved_users()
        assert clone.total_edges == graph.total_edges
