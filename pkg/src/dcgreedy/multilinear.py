"""Multilinear extension of submodular set functions.

For f on subsets of {1..n} the extension at x in [0,1]^n is the expected
value of f over the random set that includes each policy p independently
with probability x_p.  This module provides exact values and derivatives by
subset enumeration (small n only) next to the sampled estimators the
optimization algorithms actually run on, plus the Chernoff-Hoeffding sample
sizing that links estimation accuracy to sample counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import GroundSetTooLarge, UnknownPolicy
from .ground import InfoSet, Partition, sample_set, to_membership_vector
from .oracle import ValueOracle

# 2^n subset enumerations beyond this are refused.
EXACT_CAP = 20


@dataclass(frozen=True, eq=False)
class GradientEstimate:
    """Sampled partial derivatives of the extension.

    ``w`` is a dense length-n vector; only the entries listed in ``policies``
    were estimated (the rest stay 0 and carry no meaning).
    """

    w: np.ndarray
    policies: tuple[int, ...]
    n_samples: int
    seed_key: tuple[int, ...] | None = None

    def best_policy(self) -> int:
        """Estimated-gradient argmax over ``policies``; ties go to the lowest id."""
        best = self.policies[0]
        for p in self.policies[1:]:
            if self.w[p - 1] > self.w[best - 1]:
                best = p
        return best


def _mask_set(mask: int, n: int) -> frozenset[int]:
    return frozenset(p for p in range(1, n + 1) if (mask >> (p - 1)) & 1)


def _check_cap(n: int) -> None:
    if n > EXACT_CAP:
        raise GroundSetTooLarge(f"exact enumeration covers 2^n subsets; n={n} > {EXACT_CAP}")


def exact_value(oracle: ValueOracle, x: np.ndarray) -> float:
    """Extension value by full subset enumeration: sum over R of f(R) Pr[R]."""
    x = np.asarray(x, dtype=float)
    n = x.size
    _check_cap(n)
    probs = np.ones(1)
    for p in range(n):
        probs = np.concatenate([probs * (1.0 - x[p]), probs * x[p]])
    total = 0.0
    for mask in range(1 << n):
        pr = probs[mask]
        if pr != 0.0:
            total += pr * float(oracle(_mask_set(mask, n)))
    return total


def exact_gradient(oracle: ValueOracle, x: np.ndarray, policy: int) -> float:
    """Exact partial derivative: extension pinned at x_p=1 minus pinned at x_p=0.

    Equals the expected gain E[f(R + p) - f(R - p)] by multilinearity, and is
    nonnegative whenever the oracle is monotone.
    """
    x = np.asarray(x, dtype=float)
    if not 1 <= policy <= x.size:
        raise UnknownPolicy(f"policy {policy} not in 1..{x.size}")
    hi = x.copy()
    hi[policy - 1] = 1.0
    lo = x.copy()
    lo[policy - 1] = 0.0
    return exact_value(oracle, hi) - exact_value(oracle, lo)


def exact_hessian_entry(oracle: ValueOracle, x: np.ndarray, p: int, q: int) -> float:
    """Exact mixed second derivative, p != q.

    Computed as the second difference of the extension over the four vertex
    pinnings of coordinates p and q.  Nonpositive for submodular oracles, and
    bounded in magnitude by the largest singleton value.
    """
    if p == q:
        raise ValueError("mixed derivative needs two distinct policies")
    x = np.asarray(x, dtype=float)
    for policy in (p, q):
        if not 1 <= policy <= x.size:
            raise UnknownPolicy(f"policy {policy} not in 1..{x.size}")

    def pinned(vp: float, vq: float) -> float:
        pinned_x = x.copy()
        pinned_x[p - 1] = vp
        pinned_x[q - 1] = vq
        return exact_value(oracle, pinned_x)

    return pinned(1, 1) - pinned(0, 1) - pinned(1, 0) + pinned(0, 0)


def estimate_gradient_block(
    oracle: ValueOracle,
    infoset: InfoSet,
    part: Partition,
    agent: int,
    n_samples: int,
    rng: np.random.Generator,
    seed_key: tuple[int, ...] | None = None,
    batch: bool | None = None,
) -> GradientEstimate:
    """Monte-Carlo gradient over one agent's block.

    Draws ``n_samples`` policy sets from the infoset's membership
    probabilities (all of them upfront, from the single given stream, so the
    result is reproducible however the evaluation is scheduled), then reuses
    the same sample sets for every policy p in the block:

        w_p = mean over samples of f(R - p + p) - f(R - p)

    The gain is insensitive to whether p itself was sampled, so each sample
    effectively ranges over the other coordinates only.  When the oracle
    provides ``marginal_gain_batch`` the gains come from one vectorized call;
    results are bit-identical either way for integer-valued oracles.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    block = part.block(agent)
    x = to_membership_vector(infoset, part)
    inclusion = rng.random((n_samples, part.n)) < x
    policies = tuple(block)
    use_batch = batch if batch is not None else hasattr(oracle, "marginal_gain_batch")

    w = np.zeros(part.n)
    if use_batch:
        gains = oracle.marginal_gain_batch(inclusion, policies)
        sums = gains.sum(axis=0, dtype=np.float64)
        for offset, p in enumerate(policies):
            w[p - 1] = float(sums[offset]) / n_samples
    else:
        samples = [
            frozenset(int(i) + 1 for i in np.flatnonzero(row)) for row in inclusion
        ]
        for p in policies:
            total = 0.0
            for sample in samples:
                base = sample - {p}
                total += float(oracle(base | {p})) - float(oracle(base))
            w[p - 1] = total / n_samples
    return GradientEstimate(w=w, policies=policies, n_samples=n_samples, seed_key=seed_key)


def estimate_value(
    oracle: ValueOracle, x: np.ndarray, n_samples: int, rng: np.random.Generator
) -> float:
    """Plain Monte-Carlo estimate of the extension value (diagnostics only)."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    total = 0.0
    for _ in range(n_samples):
        total += float(oracle(sample_set(x, rng)))
    return total / n_samples


def required_samples(n_steps: int, delta: float) -> int:
    """Smallest sample count K with 2 exp(-K / (8 T^2)) <= delta.

    With K samples a single gradient coordinate errs by more than
    f_opt / (2 T) with probability below 2 exp(-K / (8 T^2)); inverting at a
    target per-estimate failure probability delta gives
    K = ceil(8 T^2 ln(2 / delta)).
    """
    if n_steps < 1:
        raise ValueError("step count must be at least 1")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"failure probability must lie in (0, 1), got {delta}")
    return math.ceil(8.0 * n_steps * n_steps * math.log(2.0 / delta))
