"""Ground-set primitives: agent-partitioned policies, information sets,
membership-probability vectors, and the sampling operations built on them.

Policies are globally numbered 1..n, sorted agent-wise (agent 1 owns the
lowest ids).  An *information set* maps policy ids to accumulated membership
mass; a *membership vector* is its dense length-n representation.  All values
here are immutable in spirit: operations return fresh objects and never
mutate their inputs.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .errors import MassNotOne, MassOverflow, UnknownAgent, UnknownPolicy

# Slack for probability masses that must equal (or stay below) 1.  Repeated
# accumulation of 1/T keeps rounding error orders of magnitude smaller for
# any realistic step count (T <= 1e4).
MASS_TOL = 1e-9

InfoSet = dict[int, float]


@dataclass(frozen=True)
class Partition:
    """Agent-indexed ground set: policies 1..n in contiguous per-agent blocks.

    ``block_sizes[i-1]`` is the number of policies owned by agent ``i``;
    agent ids run 1..N and policy ids 1..n.
    """

    block_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.block_sizes:
            raise ValueError("a partition needs at least one agent block")
        if any(int(s) != s or s < 1 for s in self.block_sizes):
            raise ValueError(f"every block must be a positive size, got {self.block_sizes}")
        object.__setattr__(self, "block_sizes", tuple(int(s) for s in self.block_sizes))

    @cached_property
    def _starts(self) -> tuple[int, ...]:
        # _starts[i] = first policy id of agent i+1; trailing sentinel = n+1
        out = [1]
        for size in self.block_sizes:
            out.append(out[-1] + size)
        return tuple(out)

    @property
    def n(self) -> int:
        """Total policy count."""
        return self._starts[-1] - 1

    @property
    def n_agents(self) -> int:
        return len(self.block_sizes)

    @property
    def agents(self) -> range:
        return range(1, self.n_agents + 1)

    def block(self, agent: int) -> range:
        """Policy ids owned by ``agent`` (contiguous, ascending)."""
        if not 1 <= agent <= self.n_agents:
            raise UnknownAgent(f"agent {agent} not in 1..{self.n_agents}")
        return range(self._starts[agent - 1], self._starts[agent])

    def blocks(self) -> Iterator[tuple[int, range]]:
        return ((i, self.block(i)) for i in self.agents)

    def agent_of(self, policy: int) -> int:
        if not 1 <= policy <= self.n:
            raise UnknownPolicy(f"policy {policy} not in 1..{self.n}")
        return bisect.bisect_right(self._starts, policy)

    def block_slice(self, agent: int) -> slice:
        """0-based slice of ``agent``'s block into a membership vector."""
        blk = self.block(agent)
        return slice(blk.start - 1, blk.stop - 1)


def add_mass(infoset: InfoSet, policy: int, mass: float) -> InfoSet:
    """Return ``infoset`` with ``mass`` added onto ``policy``.

    Existing mass for the policy accumulates; all other entries are copied
    unchanged.  Raises :class:`MassOverflow` if the accumulated mass would
    exceed 1 beyond tolerance, which signals a too-small step count or a
    duplicated update.
    """
    if not 0.0 <= mass <= 1.0:
        raise ValueError(f"mass must lie in [0, 1], got {mass}")
    total = infoset.get(policy, 0.0) + mass
    if total > 1.0 + MASS_TOL:
        raise MassOverflow(
            f"policy {policy} would accumulate mass {total:.12f} > 1"
        )
    out = dict(infoset)
    out[policy] = total
    return out


def max_merge(infosets: Iterable[InfoSet]) -> InfoSet:
    """Key-wise maximum of a collection of information sets.

    Every key present in any input survives, carrying the largest mass any
    input holds for it.  Commutative, associative and idempotent.
    """
    merged: InfoSet = {}
    for infoset in infosets:
        for policy, mass in infoset.items():
            if mass > merged.get(policy, -1.0):
                merged[policy] = mass
    return merged


def to_membership_vector(infoset: InfoSet, part: Partition) -> np.ndarray:
    """Dense length-n vector: entry p-1 holds the infoset's mass for p, else 0."""
    x = np.zeros(part.n)
    for policy, mass in infoset.items():
        if not 1 <= policy <= part.n:
            raise UnknownPolicy(f"policy {policy} not in 1..{part.n}")
        x[policy - 1] = mass
    return x


def sample_set(x: np.ndarray, rng: np.random.Generator) -> frozenset[int]:
    """Random policy set: each p included independently with probability x[p-1].

    Draws one uniform per policy in ascending id order, so a fixed generator
    state fully determines the result.
    """
    x = np.asarray(x, dtype=float)
    draws = rng.random(x.size)
    return frozenset(int(i) + 1 for i in np.flatnonzero(draws < x))


def block_mass(x: np.ndarray, part: Partition, agent: int) -> float:
    """Total membership mass an agent's block carries in vector ``x``."""
    return float(np.sum(x[part.block_slice(agent)]))


def sample_one_from_block(
    x_block: np.ndarray, rng: np.random.Generator, first_policy: int = 1
) -> int:
    """Draw exactly one policy from a unit-mass block.

    ``x_block`` must sum to 1 within :data:`MASS_TOL`; it is renormalized to
    exactly 1, and the draw is an inverse-CDF lookup over ascending policy
    ids.  Returns ``first_policy + index``.
    """
    x = np.asarray(x_block, dtype=float)
    total = float(x.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise MassNotOne(f"block mass {total:.12f} is not 1 within {MASS_TOL}")
    cum = np.cumsum(x / total)
    cum[-1] = 1.0
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return first_policy + idx
