"""Independent ground truth for tests: brute-force search, outcome enumeration, Monte Carlo."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import ArmParams, Ordering, UnsupportedSizeError, expected_reward, validate_ordering
from .env import RngStream, step_many

PERMUTATION_LIMIT = 8
OUTCOME_LIMIT = 20


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int


def brute_force_optimal(params: ArmParams, limit: int = PERMUTATION_LIMIT) -> Ordering:
    """Argmax of the expected reward over all K! orderings.

    Ties resolve to the lexicographically smallest ordering, since
    ``permutations`` yields in lexicographic order and only a strict
    improvement replaces the incumbent.
    """
    if params.K > limit:
        raise UnsupportedSizeError(f"K = {params.K} exceeds brute-force limit {limit}")
    best, best_value = None, -math.inf
    for ordering in itertools.permutations(range(params.K)):
        value = expected_reward(params, ordering)
        if value > best_value:
            best, best_value = ordering, value
    return best


def exhaustive_reward(params: ArmParams, ordering, limit: int = OUTCOME_LIMIT) -> float:
    """Expected reward by summing over all 2^K trigger vectors."""
    K = params.K
    if K > limit:
        raise UnsupportedSizeError(f"K = {K} exceeds outcome-enumeration limit {limit}")
    ordering = validate_ordering(ordering, K)
    total = 0.0
    for x in itertools.product((0, 1), repeat=K):
        prob = 1.0
        for i, bit in enumerate(x):
            prob *= params.mu[i] if bit else 1.0 - params.mu[i]
        if prob == 0.0:
            continue
        first = next((arm for arm in ordering if x[arm]), None)
        if first is not None:
            total += prob * (1.0 - params.p[first])
    return total


def monte_carlo_reward(params: ArmParams, ordering, n: int, rng: RngStream,
                       chunk: int = 1 << 16) -> McEstimate:
    if n < 2:
        raise ValueError("monte_carlo_reward needs n >= 2")
    ordering = validate_ordering(ordering, params.K)
    hits = 0
    done = 0
    while done < n:
        m = min(chunk, n - done)
        _, _, feedback = step_many(params, ordering, rng, m)
        hits += int(feedback.sum())
        done += m
    mean = hits / n
    # rewards are 0/1, so the sample variance follows from the hit count
    var = (hits - n * mean * mean) / (n - 1)
    return McEstimate(mean=mean, stderr=math.sqrt(max(var, 0.0) / n), n=n)


def random_instance(rng: np.random.Generator, K: int, distinct_p: bool = True) -> ArmParams:
    """Random problem instance for property checks."""
    mu = rng.uniform(0.0, 1.0, K)
    if distinct_p:
        p = rng.choice(np.linspace(0.0, 1.0, 1001), size=K, replace=False)
    else:
        p = rng.uniform(0.0, 1.0, K)
    return ArmParams(tuple(mu), tuple(p))
