import itertools

import numpy as np
import pytest

from dcgreedy import (
    CommGraph,
    Disconnected,
    Partition,
    UnknownAgent,
    complete_graph,
    exchange_round,
    max_merge,
    path_graph,
    ring_graph,
    star_graph,
    to_membership_vector,
)


class TestCommGraph:
    def test_neighbors(self):
        assert ring_graph(5).neighbors(1) == {2, 5}
        assert complete_graph(3).neighbors(2) == {1, 3}
        assert path_graph(3).neighbors(3) == {2}

    def test_diameter(self):
        assert ring_graph(5).diameter() == 2
        assert complete_graph(4).diameter() == 1
        assert path_graph(4).diameter() == 3
        assert star_graph(5).diameter() == 2
        assert CommGraph(1).diameter() == 0

    def test_disconnected_rejected(self):
        with pytest.raises(Disconnected):
            CommGraph(4, [(1, 2), (3, 4)])

    def test_bad_edges_named(self):
        with pytest.raises(ValueError, match=r"\[1, 7\]"):
            CommGraph(5, [(1, 7)])
        with pytest.raises(ValueError, match="self-loop"):
            CommGraph(3, [(2, 2), (1, 2), (2, 3)])

    def test_unknown_agent(self):
        with pytest.raises(UnknownAgent):
            ring_graph(4).neighbors(9)


def _random_states(n_agents, n_policies, rng):
    states = {}
    for i in range(1, n_agents + 1):
        keys = rng.choice(n_policies, size=rng.integers(0, n_policies + 1), replace=False)
        states[i] = {int(k) + 1: float(rng.random()) for k in keys}
    return states


class TestExchangeRound:
    def test_identical_states_are_fixed_point(self):
        g = ring_graph(4)
        state = {1: 0.5, 3: 0.25}
        states = {i: dict(state) for i in g.agents}
        assert exchange_round(g, states) == states

    def test_path_flooding(self):
        g = path_graph(3)
        states = {1: {1: 0.5}, 2: {}, 3: {}}
        after_one = exchange_round(g, states)
        assert after_one == {1: {1: 0.5}, 2: {1: 0.5}, 3: {}}
        after_two = exchange_round(g, after_one)
        assert all(after_two[i] == {1: 0.5} for i in g.agents)

    def test_requires_one_state_per_agent(self):
        g = path_graph(3)
        with pytest.raises(ValueError):
            exchange_round(g, {1: {}, 2: {}})

    def test_rounds_are_monotone(self):
        rng = np.random.default_rng(0)
        g = ring_graph(5)
        part = Partition((2,) * 5)
        states = _random_states(5, part.n, rng)
        for _ in range(4):
            before = {i: to_membership_vector(states[i], part) for i in g.agents}
            states = exchange_round(g, states)
            for i in g.agents:
                after = to_membership_vector(states[i], part)
                assert np.all(after >= before[i])

    def test_diameter_rounds_reach_consensus_on_all_small_graphs(self):
        # exhaustive over every labeled connected graph with up to 6 agents
        rng = np.random.default_rng(1)
        checked = 0
        for n in range(1, 7):
            pairs = list(itertools.combinations(range(1, n + 1), 2))
            for bits in range(1 << len(pairs)):
                edges = [pairs[k] for k in range(len(pairs)) if (bits >> k) & 1]
                try:
                    g = CommGraph(n, edges)
                except Disconnected:
                    continue
                states = _random_states(n, 4, rng)
                target = max_merge(states.values())
                current = states
                for _ in range(max(g.diameter(), 1) if n > 1 else 1):
                    current = exchange_round(g, current)
                assert all(current[i] == target for i in g.agents), (n, edges)
                checked += 1
        assert checked == 1 + 1 + 4 + 38 + 728 + 26704  # connected graph counts
