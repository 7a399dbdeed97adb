"""Shared fixtures and independent enumeration oracles for the test suite.

The enumeration helpers here deliberately re-derive expected values from
first principles (probability-weighted subset sums, finite differences)
rather than reusing the package's own code paths, so they stay valid
cross-checks.
"""

from __future__ import annotations

import numpy as np
import pytest

from dcgreedy import CoverageOracle, generate_scenario, two_cluster_scenario


def subset_of(mask: int, n: int) -> frozenset[int]:
    return frozenset(p for p in range(1, n + 1) if (mask >> (p - 1)) & 1)


def subset_probability(mask: int, x: np.ndarray) -> float:
    pr = 1.0
    for q in range(1, x.size + 1):
        pr *= x[q - 1] if (mask >> (q - 1)) & 1 else 1.0 - x[q - 1]
    return pr


def enum_value(oracle, x: np.ndarray) -> float:
    """Extension value as a direct probability-weighted sum over all subsets."""
    n = x.size
    return sum(
        subset_probability(mask, x) * float(oracle(subset_of(mask, n)))
        for mask in range(1 << n)
    )


def enum_gradient(oracle, x: np.ndarray, p: int) -> float:
    """Expected gain E[f(R + p) - f(R - p)] by direct subset enumeration."""
    n = x.size
    total = 0.0
    for mask in range(1 << n):
        pr = subset_probability(mask, x)
        if pr == 0.0:
            continue
        base = subset_of(mask, n) - {p}
        total += pr * (float(oracle(base | {p})) - float(oracle(base)))
    return total


def enum_gain_variance(oracle, x: np.ndarray, p: int) -> float:
    """Variance of the per-sample gain f(R + p) - f(R - p) under R ~ x."""
    n = x.size
    mean = 0.0
    second = 0.0
    for mask in range(1 << n):
        pr = subset_probability(mask, x)
        if pr == 0.0:
            continue
        base = subset_of(mask, n) - {p}
        gain = float(oracle(base | {p})) - float(oracle(base))
        mean += pr * gain
        second += pr * gain * gain
    return second - mean * mean


def small_coverage_instance(seed: int, n_agents: int = 2, block_size: int = 3,
                            n_points: int = 30):
    """Random desk-scale coverage instance; returns (scenario, oracle)."""
    rng = np.random.default_rng(seed)
    radii = tuple(float(r) for r in rng.uniform(0.6, 1.6, size=n_agents))
    scenario = generate_scenario(
        n_agents=n_agents,
        radii=radii,
        grid=(block_size, 1),
        field_size=(1.8 * block_size, 2.0),
        n_points=n_points,
        graph="path" if n_agents < 3 else "ring",
        seed=seed,
    )
    return scenario, CoverageOracle(scenario)


@pytest.fixture(scope="session")
def two_cluster():
    scenario = two_cluster_scenario()
    return scenario, CoverageOracle(scenario)
