"""Policy-selection algorithms and their runtime invariant audit.

The distributed continuous greedy run proceeds in T synchronous steps.  Per
step every agent estimates the extension gradient over its own policy block
from its current belief, moves 1/T of membership mass onto its best policy,
and the network then max-merges beliefs for a configurable number of rounds.
After T steps each block carries exactly unit mass and every agent rounds
its own block to a single policy.  Baselines: the centralized variant of the
same ascent (one shared belief, no network), classic sequential greedy along
an agent order, and exhaustive search for desk-scale ground truth.

Every distributed run is audited against the structural facts the analysis
relies on (own-block dominance, exact mass growth, bounded belief staleness,
consensus under diameter-many rounds); the audit report travels with the
trace so harnesses can surface violations without aborting sweeps.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InfeasibleOutput, SearchSpaceTooLarge
from .ground import (
    InfoSet,
    MASS_TOL,
    Partition,
    add_mass,
    sample_one_from_block,
    to_membership_vector,
)
from .multilinear import GradientEstimate, estimate_gradient_block
from .network import CommGraph, exchange_round
from .oracle import ValueOracle

_GRAD, _ROUND = 0, 1


def _stream(seed: int, agent: int, step: int, purpose: int) -> np.random.Generator:
    # One independent substream per (agent, step, purpose): runs are
    # reproducible and agents could evaluate in parallel without contention.
    key = np.random.SeedSequence(seed, spawn_key=(agent, step, purpose))
    return np.random.default_rng(key)


@dataclass(frozen=True)
class RunConfig:
    """Knobs of a continuous greedy run.

    ``n_samples`` may be a single count or a per-agent mapping.  ``hops`` is
    the number of merge rounds per step; 1 is the cheapest variant, the graph
    diameter buys exact consensus (and the tighter guarantee).  ``rounding``
    picks how unit-mass blocks become policies: ``sample`` draws by mass (the
    analyzed behavior), ``argmax`` takes the heaviest policy (variance-free,
    useful for regression tests).
    """

    n_steps: int
    n_samples: int | Mapping[int, int]
    hops: int = 1
    rounding: str = "sample"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_steps < 1:
            raise ValueError("need at least one step")
        if self.hops < 1:
            raise ValueError("need at least one merge round per step")
        if self.rounding not in ("sample", "argmax"):
            raise ValueError(f"rounding must be 'sample' or 'argmax', got {self.rounding!r}")
        if isinstance(self.n_samples, int):
            if self.n_samples < 1:
                raise ValueError("need at least one sample")
        elif any(k < 1 for k in self.n_samples.values()):
            raise ValueError("every per-agent sample count must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def samples_for(self, agent: int) -> int:
        if isinstance(self.n_samples, int):
            return self.n_samples
        return int(self.n_samples[agent])


@dataclass
class StepRecord:
    """Everything one step produced, for auditing and debugging."""

    step: int
    gradients: dict[int, GradientEstimate]
    chosen: dict[int, int]
    infosets_local: dict[int, InfoSet]  # after the local mass move, before merging
    infosets: dict[int, InfoSet]  # after the merge rounds


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    checks: tuple[str, ...]
    failures: tuple[str, ...]


@dataclass
class RunTrace:
    config: RunConfig
    part: Partition
    graph: CommGraph
    steps: list[StepRecord]
    selection: dict[int, int] = field(default_factory=dict)
    utility: float = 0.0
    audit: AuditReport | None = None

    @property
    def final_infosets(self) -> dict[int, InfoSet]:
        return self.steps[-1].infosets


@dataclass
class CentralStepRecord:
    step: int
    gradients: dict[int, GradientEstimate]
    chosen: dict[int, int]
    infoset: InfoSet


@dataclass
class CentralTrace:
    config: RunConfig
    part: Partition
    steps: list[CentralStepRecord]
    selection: dict[int, int] = field(default_factory=dict)
    utility: float = 0.0

    @property
    def final_infoset(self) -> InfoSet:
        return self.steps[-1].infoset


def _round_block(
    infoset: InfoSet, part: Partition, agent: int, config: RunConfig
) -> int:
    block = part.block(agent)
    x_block = np.array([infoset.get(p, 0.0) for p in block])
    if abs(float(x_block.sum()) - 1.0) > MASS_TOL:
        raise InfeasibleOutput(
            f"agent {agent} ended with block mass {x_block.sum():.12f}, expected 1"
        )
    if config.rounding == "argmax":
        return block.start + int(np.argmax(x_block))
    rng = _stream(config.seed, agent, 0, _ROUND)
    return sample_one_from_block(x_block, rng, first_policy=block.start)


def distributed_continuous_greedy(
    oracle: ValueOracle,
    part: Partition,
    graph: CommGraph,
    config: RunConfig,
) -> tuple[frozenset[int], RunTrace]:
    """Run the networked continuous greedy ascent; returns (policy set, trace).

    The returned set holds exactly one policy per agent block.  The trace
    carries every step's gradient estimates, choices and beliefs plus the
    invariant audit over the whole run.
    """
    if graph.n_agents != part.n_agents:
        raise ValueError(
            f"graph has {graph.n_agents} agents but partition has {part.n_agents}"
        )
    diam = graph.diameter()
    if config.hops > max(diam, 1):
        raise ValueError(f"hops={config.hops} exceeds the graph diameter {diam}")

    n_steps = config.n_steps
    states: dict[int, InfoSet] = {i: {} for i in part.agents}
    steps: list[StepRecord] = []
    for t in range(1, n_steps + 1):
        gradients: dict[int, GradientEstimate] = {}
        chosen: dict[int, int] = {}
        local: dict[int, InfoSet] = {}
        for i in part.agents:
            rng = _stream(config.seed, i, t, _GRAD)
            estimate = estimate_gradient_block(
                oracle,
                states[i],
                part,
                i,
                config.samples_for(i),
                rng,
                seed_key=(config.seed, i, t, _GRAD),
            )
            best = estimate.best_policy()
            gradients[i] = estimate
            chosen[i] = best
            local[i] = add_mass(states[i], best, 1.0 / n_steps)
        merged = local
        for _ in range(config.hops):
            merged = exchange_round(graph, merged)
        states = merged
        steps.append(StepRecord(t, gradients, chosen, local, states))

    trace = RunTrace(config=config, part=part, graph=graph, steps=steps)
    trace.selection = {i: _round_block(states[i], part, i, config) for i in part.agents}
    picked = frozenset(trace.selection.values())
    trace.utility = float(oracle(picked))
    trace.audit = audit_trace(trace)
    return picked, trace


def central_continuous_greedy(
    oracle: ValueOracle, part: Partition, config: RunConfig
) -> tuple[frozenset[int], CentralTrace]:
    """Centralized baseline: one shared belief updated by per-block argmaxes.

    Gradient samples for block i are drawn from the same per-agent substream
    the distributed run would use, so on a graph where one merge round
    already reaches consensus the two algorithms produce identical traces.
    """
    n_steps = config.n_steps
    state: InfoSet = {}
    steps: list[CentralStepRecord] = []
    for t in range(1, n_steps + 1):
        gradients: dict[int, GradientEstimate] = {}
        chosen: dict[int, int] = {}
        for i in part.agents:
            rng = _stream(config.seed, i, t, _GRAD)
            estimate = estimate_gradient_block(
                oracle,
                state,
                part,
                i,
                config.samples_for(i),
                rng,
                seed_key=(config.seed, i, t, _GRAD),
            )
            gradients[i] = estimate
            chosen[i] = estimate.best_policy()
        for i in part.agents:
            state = add_mass(state, chosen[i], 1.0 / n_steps)
        steps.append(CentralStepRecord(t, gradients, chosen, state))

    trace = CentralTrace(config=config, part=part, steps=steps)
    trace.selection = {i: _round_block(state, part, i, config) for i in part.agents}
    picked = frozenset(trace.selection.values())
    trace.utility = float(oracle(picked))
    return picked, trace


def sequential_greedy(
    oracle: ValueOracle, part: Partition, sequence: Sequence[int]
) -> frozenset[int]:
    """Visit agents in the given order; each takes its best marginal policy.

    Ties break toward the lowest policy id.  The outcome generally depends on
    the order, which is exactly what the networked ascent avoids.
    """
    if sorted(sequence) != list(part.agents):
        raise ValueError(f"sequence {list(sequence)} is not a permutation of the agents")
    chosen: set[int] = set()
    for agent in sequence:
        best_policy = None
        best_value = -math.inf
        for p in part.block(agent):
            candidate = float(oracle(frozenset(chosen | {p})))
            if candidate > best_value:
                best_policy, best_value = p, candidate
        chosen.add(best_policy)
    return frozenset(chosen)


def brute_force_optimum(
    oracle: ValueOracle, part: Partition, cap: int = 10**6
) -> tuple[frozenset[int], float]:
    """Exhaustive one-per-block search; ties go to the lexicographically
    smallest selection.  For monotone oracles this is the true optimum of the
    one-choice-per-agent problem."""
    size = 1
    for s in part.block_sizes:
        size *= s
        if size > cap:
            raise SearchSpaceTooLarge(f"block product exceeds {cap}")
    best_combo: tuple[int, ...] | None = None
    best_value = -math.inf
    for combo in itertools.product(*(part.block(i) for i in part.agents)):
        value = float(oracle(frozenset(combo)))
        if value > best_value:
            best_combo, best_value = combo, value
    return frozenset(best_combo), best_value


class BoundPair(NamedTuple):
    """Worst-case guarantee factors (multiples of the optimal value)."""

    one_hop: float
    full_consensus: float


def approximation_bound(
    n_agents: int, diameter: int, n_steps: int, f_star: float = 1.0
) -> BoundPair:
    """Guarantee on the expected output value, as a multiple of ``f_star``.

    ``one_hop`` applies to runs with a single merge round per step,
    ``full_consensus`` to runs with diameter-many rounds.  Either can be
    nonpositive for small step counts; callers should treat that as a vacuous
    bound, not an error.
    """
    if n_steps < 1:
        raise ValueError("need at least one step")
    base = 1.0 - 1.0 / math.e
    slack_one_hop = (2.0 * n_agents**2 * diameter + 0.5 * n_agents**2 + n_agents) / n_steps
    slack_consensus = (0.5 * n_agents**2 + n_agents) / n_steps
    return BoundPair(
        one_hop=base * (1.0 - slack_one_hop) * f_star,
        full_consensus=base * (1.0 - slack_consensus) * f_star,
    )


class SuccessProbability(NamedTuple):
    product_form: float
    lower_bound: float


def success_probability(
    n_steps: int,
    n_samples: int | Mapping[int, int],
    block_sizes: Sequence[int],
) -> SuccessProbability:
    """Probability with which the guarantee holds, given the sample counts.

    ``product_form`` multiplies per-estimate success probabilities across all
    policies and steps (each factor clamped at 0);  ``lower_bound`` is the
    simpler expression 1 - 2 T n exp(-K_min / (8 T^2)), never above the
    product form.
    """
    agents = range(1, len(block_sizes) + 1)
    if isinstance(n_samples, int):
        counts = {i: n_samples for i in agents}
    else:
        counts = {i: int(n_samples[i]) for i in agents}
    product = 1.0
    for i, size in zip(agents, block_sizes):
        per_estimate = max(0.0, 1.0 - 2.0 * math.exp(-counts[i] / (8.0 * n_steps**2)))
        product *= per_estimate**size
    product **= n_steps
    n_total = sum(block_sizes)
    k_min = min(counts.values())
    lower = 1.0 - 2.0 * n_steps * n_total * math.exp(-k_min / (8.0 * n_steps**2))
    assert product >= lower - 1e-12
    return SuccessProbability(product_form=product, lower_bound=lower)


def _consensus_vector(xs: Mapping[int, np.ndarray]) -> np.ndarray:
    return np.max(np.stack(list(xs.values())), axis=0)


def audit_trace(trace: RunTrace) -> AuditReport:
    """Check a distributed run against the structural invariants of the ascent.

    Per step t (1-based), with x_i the membership vector of agent i's belief
    and xbar the agent-wise pointwise maximum:

    * own-block dominance: xbar restricted to block i equals agent i's own
      entries (nobody overestimates another agent's block),
    * own-block mass: agent i's block carries exactly t/T mass,
    * staleness: 0 <= mean(xbar - x_i) <= diameter/T for every agent,
    * growth: xbar advances by exactly the sum of the step's unit moves / T,
      so its mean coordinate gains exactly 1/(NT) per step,
    * consensus: with diameter-many merge rounds all beliefs equal xbar,
    * feasibility: the final selection takes exactly one policy per block.
    """
    part, graph, config = trace.part, trace.graph, trace.config
    n_agents = part.n_agents
    n_steps = config.n_steps
    diam = graph.diameter()
    full_consensus = config.hops >= max(diam, 1)
    checks = (
        "own-block-dominance",
        "own-block-mass",
        "belief-staleness",
        "consensus-growth",
        "mean-growth",
        "consensus-under-full-hops",
        "feasible-selection",
    )
    failures: list[str] = []

    prev_bar = np.zeros(part.n)
    for record in trace.steps:
        t = record.step
        xs = {
            i: to_membership_vector(record.infosets[i], part) for i in part.agents
        }
        xbar = _consensus_vector(xs)

        own = np.zeros(part.n)
        for i in part.agents:
            own[part.block_slice(i)] = xs[i][part.block_slice(i)]
        if not np.array_equal(xbar, own):
            failures.append(f"step {t}: a neighbor estimate exceeds an owner's block entries")

        for i in part.agents:
            mass = float(xs[i][part.block_slice(i)].sum())
            if abs(mass - t / n_steps) > MASS_TOL:
                failures.append(
                    f"step {t}: agent {i} own-block mass {mass:.12f} != {t}/{n_steps}"
                )
            gap = float((xbar - xs[i]).sum()) / n_agents
            if gap < -MASS_TOL or gap > diam / n_steps + MASS_TOL:
                failures.append(
                    f"step {t}: agent {i} staleness {gap:.12f} outside [0, {diam}/{n_steps}]"
                )
            if full_consensus and not np.array_equal(xs[i], xbar):
                failures.append(f"step {t}: agent {i} disagrees despite full merge rounds")

        moves = np.zeros(part.n)
        for i in part.agents:
            moves[record.chosen[i] - 1] += 1.0 / n_steps
        if np.max(np.abs((xbar - prev_bar) - moves)) > MASS_TOL:
            failures.append(f"step {t}: consensus vector did not advance by the step moves")
        mean_gain = float((xbar - prev_bar).sum()) / n_agents
        if abs(mean_gain - 1.0 / n_steps) > MASS_TOL:
            failures.append(
                f"step {t}: mean coordinate gain {mean_gain:.12f} != 1/{n_steps}"
            )
        prev_bar = xbar

    if trace.selection:
        for i in part.agents:
            in_block = [p for p in trace.selection.values() if p in part.block(i)]
            if len(in_block) != 1:
                failures.append(f"selection takes {len(in_block)} policies from block {i}")

    return AuditReport(passed=not failures, checks=checks, failures=tuple(failures))


def default_orders(n_agents: int) -> tuple[tuple[int, ...], ...]:
    """Agent orders for sensitivity studies: all rotations plus the reversal."""
    base = list(range(1, n_agents + 1))
    orders = [tuple(base[k:] + base[:k]) for k in range(n_agents)]
    orders.append(tuple(reversed(base)))
    return tuple(orders)
