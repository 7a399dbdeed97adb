"""Undirected communication graphs and the synchronous exchange round.

One exchange round replaces every agent's information set by the key-wise
maximum over its own set and its neighbors' sets, all computed from the same
pre-round snapshot (lockstep semantics, no agent-ordering artifacts).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import Disconnected, UnknownAgent
from .ground import InfoSet, max_merge


@dataclass(frozen=True)
class CommGraph:
    """Connected undirected graph over agents 1..N, no self-loops."""

    n_agents: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __init__(self, n_agents: int, edges: Iterable[Iterable[int]] = ()) -> None:
        object.__setattr__(self, "n_agents", int(n_agents))
        if self.n_agents < 1:
            raise ValueError("graph needs at least one agent")
        normalized = set()
        for edge in edges:
            pair = tuple(int(v) for v in edge)
            if len(pair) != 2:
                raise ValueError(f"edge {list(edge)} must have exactly two endpoints")
            a, b = pair
            if a == b:
                raise ValueError(f"edge [{a}, {b}] is a self-loop")
            for v in (a, b):
                if not 1 <= v <= self.n_agents:
                    raise ValueError(
                        f"edge [{a}, {b}] references unknown agent {v} (agents are 1..{self.n_agents})"
                    )
            normalized.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(normalized))
        if self._bfs_hops(1).count(-1) > 0:
            raise Disconnected("communication graph is not connected")

    @property
    def agents(self) -> range:
        return range(1, self.n_agents + 1)

    @cached_property
    def _adjacency(self) -> tuple[frozenset[int], ...]:
        adj: list[set[int]] = [set() for _ in range(self.n_agents + 1)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return tuple(frozenset(s) for s in adj)

    def neighbors(self, agent: int) -> frozenset[int]:
        if not 1 <= agent <= self.n_agents:
            raise UnknownAgent(f"agent {agent} not in 1..{self.n_agents}")
        return self._adjacency[agent]

    def _bfs_hops(self, source: int) -> list[int]:
        hops = [-1] * (self.n_agents + 1)
        hops[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in self._adjacency[v]:
                if hops[w] < 0:
                    hops[w] = hops[v] + 1
                    queue.append(w)
        return hops[1:]

    @cached_property
    def _diameter(self) -> int:
        worst = 0
        for source in self.agents:
            hops = self._bfs_hops(source)
            if -1 in hops:
                raise Disconnected("communication graph is not connected")
            worst = max(worst, max(hops))
        return worst

    def diameter(self) -> int:
        """Longest shortest-path hop count between any two agents."""
        return self._diameter


def exchange_round(graph: CommGraph, states: Mapping[int, InfoSet]) -> dict[int, InfoSet]:
    """One synchronous max-merge round over the graph.

    Every agent's new state is the merge of its own and its neighbors' states
    taken from the same snapshot.  Membership vectors are pointwise
    non-decreasing under this map.
    """
    if set(states) != set(graph.agents):
        raise ValueError("need exactly one information set per agent")
    return {
        i: max_merge(states[j] for j in sorted(graph.neighbors(i) | {i}))
        for i in graph.agents
    }


def ring_graph(n_agents: int) -> CommGraph:
    if n_agents < 3:
        raise ValueError("a ring needs at least 3 agents")
    edges = [(i, i % n_agents + 1) for i in range(1, n_agents + 1)]
    return CommGraph(n_agents, edges)


def path_graph(n_agents: int) -> CommGraph:
    return CommGraph(n_agents, [(i, i + 1) for i in range(1, n_agents)])


def star_graph(n_agents: int) -> CommGraph:
    """Agent 1 is the hub."""
    return CommGraph(n_agents, [(1, i) for i in range(2, n_agents + 1)])


def complete_graph(n_agents: int) -> CommGraph:
    edges = [(a, b) for a in range(1, n_agents + 1) for b in range(a + 1, n_agents + 1)]
    return CommGraph(n_agents, edges)
