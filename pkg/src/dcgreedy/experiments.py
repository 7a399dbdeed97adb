"""Batch experiment harness: sweeps, CSV emission, scenario generation.

A sweep runs one algorithm over the cross product of its parameter lists and
emits one row per cell in spec order.  Rows are fully determined by the spec
and the seeds except for the wall-time column; determinism tests should
compare rows with ``ms`` stripped.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .algorithms import (
    RunConfig,
    approximation_bound,
    brute_force_optimum,
    central_continuous_greedy,
    default_orders,
    distributed_continuous_greedy,
    sequential_greedy,
    success_probability,
)
from .oracle import CoverageOracle, CoverageScenario, save_scenario, uniform_points

CSV_HEADER = ("algo", "T", "K", "hops", "seed", "order", "utility", "bound",
              "success_prob", "audit", "ms")

ALGORITHMS = ("distributed", "central", "sequential", "brute")


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: an algorithm, a scenario, and the parameter lists to cross.

    ``orders`` only matters for the sequential algorithm; empty means the
    default rotations-plus-reversal family.  The ``bound`` and
    ``success_prob`` columns report guarantee *factors* (multiples of the
    unknown optimal value) and the probability the guarantee carries, both
    straight formula evaluations.
    """

    scenario: CoverageScenario
    algorithm: str
    n_steps: tuple[int, ...] = (20,)
    n_samples: tuple[int, ...] = (500,)
    hops: tuple[int, ...] = (1,)
    seeds: tuple[int, ...] = (0,)
    orders: tuple[tuple[int, ...], ...] = ()
    rounding: str = "sample"

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        for name, values in (("n_steps", self.n_steps), ("n_samples", self.n_samples),
                             ("hops", self.hops), ("seeds", self.seeds)):
            if not values:
                raise ValueError(f"sweep list {name} must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")


@dataclass(frozen=True)
class ResultRow:
    algo: str
    n_steps: int | None
    n_samples: int | None
    hops: int | None
    seed: int | None
    order: tuple[int, ...] | None
    utility: float
    bound: float | None
    success_prob: float | None
    audit: str
    ms: int

    def csv_values(self) -> tuple[str, ...]:
        def num(v) -> str:
            if v is None:
                return ""
            return format(float(v), ".10g")

        return (
            self.algo,
            "" if self.n_steps is None else str(self.n_steps),
            "" if self.n_samples is None else str(self.n_samples),
            "" if self.hops is None else str(self.hops),
            "" if self.seed is None else str(self.seed),
            "" if self.order is None else "-".join(str(a) for a in self.order),
            num(self.utility),
            num(self.bound),
            num(self.success_prob),
            self.audit,
            str(self.ms),
        )


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_values())
    return buffer.getvalue()


def write_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def run_experiment(spec: ExperimentSpec, out: str | Path | None = None) -> list[ResultRow]:
    """Execute the sweep; returns rows in spec order and optionally writes CSV."""
    scenario = spec.scenario
    oracle = CoverageOracle(scenario)
    part = scenario.partition
    rows: list[ResultRow] = []

    if spec.algorithm == "distributed":
        graph = scenario.graph
        diam = graph.diameter()
        for n_steps in spec.n_steps:
            for n_samples in spec.n_samples:
                for hops in spec.hops:
                    bounds = approximation_bound(part.n_agents, diam, n_steps)
                    bound = bounds.full_consensus if hops >= max(diam, 1) else bounds.one_hop
                    prob = success_probability(n_steps, n_samples, part.block_sizes).product_form
                    for seed in spec.seeds:
                        config = RunConfig(
                            n_steps=n_steps, n_samples=n_samples, hops=hops,
                            rounding=spec.rounding, seed=seed,
                        )
                        start = time.perf_counter()
                        _, trace = distributed_continuous_greedy(oracle, part, graph, config)
                        ms = int((time.perf_counter() - start) * 1000)
                        rows.append(ResultRow(
                            "distributed", n_steps, n_samples, hops, seed, None,
                            trace.utility, bound, prob,
                            "pass" if trace.audit.passed else "fail", ms,
                        ))
    elif spec.algorithm == "central":
        for n_steps in spec.n_steps:
            for n_samples in spec.n_samples:
                bound = approximation_bound(part.n_agents, 0, n_steps).full_consensus
                prob = success_probability(n_steps, n_samples, part.block_sizes).product_form
                for seed in spec.seeds:
                    config = RunConfig(
                        n_steps=n_steps, n_samples=n_samples,
                        rounding=spec.rounding, seed=seed,
                    )
                    start = time.perf_counter()
                    _, trace = central_continuous_greedy(oracle, part, config)
                    ms = int((time.perf_counter() - start) * 1000)
                    rows.append(ResultRow(
                        "central", n_steps, n_samples, None, seed, None,
                        trace.utility, bound, prob, "", ms,
                    ))
    elif spec.algorithm == "sequential":
        orders = spec.orders or default_orders(part.n_agents)
        for order in orders:
            start = time.perf_counter()
            picked = sequential_greedy(oracle, part, order)
            ms = int((time.perf_counter() - start) * 1000)
            rows.append(ResultRow(
                "sequential", None, None, None, None, order,
                float(oracle(picked)), None, None, "", ms,
            ))
    else:  # brute
        start = time.perf_counter()
        _, best = brute_force_optimum(oracle, part)
        ms = int((time.perf_counter() - start) * 1000)
        rows.append(ResultRow(
            "brute", None, None, None, None, None, best, None, None, "", ms,
        ))

    if out is not None:
        write_csv(rows, out)
    return rows


def generate_scenario(
    n_agents: int = 5,
    radii: Sequence[float] = (0.5, 0.6, 0.7, 0.8, 1.5),
    grid: tuple[int, int] = (6, 6),
    field_size: tuple[float, float] = (6.0, 6.0),
    n_points: int = 900,
    graph: str | Sequence[Sequence[int]] = "ring",
    seed: int = 0,
    out: str | Path | None = None,
) -> CoverageScenario:
    """Build (and optionally write) a random coverage scenario.

    Interest points are uniform over the field; every agent may use every
    grid placement.  The same arguments and seed always produce the same
    scenario, and :func:`save_scenario` writes it byte-identically.
    """
    if len(radii) != n_agents:
        raise ValueError(f"need {n_agents} radii, got {len(radii)}")
    if isinstance(graph, str):
        if graph == "ring":
            edges = tuple((i, i % n_agents + 1) for i in range(1, n_agents + 1)) \
                if n_agents >= 3 else tuple((i, i + 1) for i in range(1, n_agents))
        elif graph == "complete":
            edges = tuple(
                (a, b) for a in range(1, n_agents + 1) for b in range(a + 1, n_agents + 1)
            )
        elif graph == "path":
            edges = tuple((i, i + 1) for i in range(1, n_agents))
        elif graph == "star":
            edges = tuple((1, i) for i in range(2, n_agents + 1))
        else:
            raise ValueError(f"unknown graph family {graph!r}")
    else:
        edges = tuple((int(a), int(b)) for a, b in graph)
    n_cells = grid[0] * grid[1]
    scenario = CoverageScenario(
        field=tuple(field_size),
        grid=tuple(grid),
        points=uniform_points(n_points, tuple(field_size), seed),
        radii=tuple(radii),
        allowed=tuple(tuple(range(n_cells)) for _ in range(n_agents)),
        edges=edges,
    )
    scenario.graph  # validate connectivity up front
    if out is not None:
        save_scenario(scenario, out)
    return scenario


@dataclass
class SensitivityReport:
    """Order sensitivity of sequential greedy vs. seed spread of the ascent."""

    sequential: dict[tuple[int, ...], float]
    distributed: dict[int, float]
    rows: list[ResultRow] = field(default_factory=list)

    @property
    def sequential_spread(self) -> float:
        values = list(self.sequential.values())
        return max(values) - min(values)

    @property
    def distributed_spread(self) -> float:
        values = list(self.distributed.values())
        return max(values) - min(values)

    @property
    def distributed_iqr(self) -> float:
        values = np.array(list(self.distributed.values()))
        q1, q3 = np.percentile(values, [25, 75])
        return float(q3 - q1)


def sequence_sensitivity_report(
    scenario: CoverageScenario,
    orders: Sequence[Sequence[int]],
    config: RunConfig,
    seeds: Sequence[int],
    out: str | Path | None = None,
) -> SensitivityReport:
    """Compare sequential greedy across agent orders against the distributed
    ascent across seeds; both utility distributions go into one CSV."""
    if not isinstance(config.n_samples, int):
        raise ValueError("sensitivity studies take a single shared sample count")
    sequential_rows = run_experiment(
        ExperimentSpec(
            scenario=scenario,
            algorithm="sequential",
            orders=tuple(tuple(o) for o in orders),
        )
    )
    distributed_rows = run_experiment(
        ExperimentSpec(
            scenario=scenario,
            algorithm="distributed",
            n_steps=(config.n_steps,),
            n_samples=(config.samples_for(1),),
            hops=(config.hops,),
            seeds=tuple(seeds),
            rounding=config.rounding,
        )
    )
    report = SensitivityReport(
        sequential={row.order: row.utility for row in sequential_rows},
        distributed={row.seed: row.utility for row in distributed_rows},
        rows=sequential_rows + distributed_rows,
    )
    if out is not None:
        write_csv(report.rows, out)
    return report
