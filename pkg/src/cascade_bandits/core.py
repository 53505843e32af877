"""Cascade reward model: expected reward, optimal ordering and gap statistics.

Arms are indexed from 0. An ordering is a tuple of arm indices where
position ``j`` holds the arm examined ``j``-th in the cascade.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

Ordering = tuple[int, ...]

# Enumeration cap for the permutation-based gap statistics (K! orderings).
ENUMERATION_LIMIT = 8


class UnsupportedSizeError(ValueError):
    """Raised when an exhaustive computation is asked for too many arms."""


@dataclass(frozen=True)
class ArmParams:
    """A problem instance: trigger probability ``mu[i]`` and error probability ``p[i]`` per arm."""

    mu: tuple[float, ...]
    p: tuple[float, ...]

    def __post_init__(self):
        mu = tuple(float(m) for m in self.mu)
        p = tuple(float(x) for x in self.p)
        if len(mu) == 0:
            raise ValueError("ArmParams needs at least one arm")
        if len(mu) != len(p):
            raise ValueError(f"mu has {len(mu)} entries but p has {len(p)}")
        for name, values in (("mu", mu), ("p", p)):
            for i, v in enumerate(values):
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"{name}[{i}] = {v!r} not in [0, 1]")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "p", p)

    @property
    def K(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class GapStats:
    per_arm: tuple[float, ...]
    max: float
    min: float
    # True when no ordering has a positive gap (K == 1 or all p equal).
    degenerate: bool = False


def validate_ordering(ordering: Sequence[int], K: int) -> Ordering:
    ordering = tuple(int(a) for a in ordering)
    if len(ordering) != K:
        raise ValueError(f"ordering has length {len(ordering)}, expected {K}")
    if sorted(ordering) != list(range(K)):
        raise ValueError(f"ordering {ordering} is not a permutation of 0..{K - 1}")
    return ordering


def position_of(ordering: Sequence[int], arm: int) -> int:
    """Inverse lookup: the cascade position holding ``arm``."""
    return list(ordering).index(arm)


def swap_adjacent(ordering: Sequence[int], position: int) -> Ordering:
    out = list(ordering)
    out[position], out[position + 1] = out[position + 1], out[position]
    return tuple(out)


def expected_reward(params: ArmParams, ordering: Sequence[int]) -> float:
    """Probability that the served arm gets positive feedback under ``ordering``."""
    ordering = validate_ordering(ordering, params.K)
    return _reward(params.mu, params.p, ordering)


def _reward(mu, p, ordering) -> float:
    total = 0.0
    none_fired = 1.0
    for arm in ordering:
        total += (1.0 - p[arm]) * mu[arm] * none_fired
        none_fired *= 1.0 - mu[arm]
    return total


def optimal_ordering(params: ArmParams) -> Ordering:
    """Arms sorted by ascending error probability, ties by arm index."""
    return tuple(sorted(range(params.K), key=lambda i: (params.p[i], i)))


def adjacent_swap_delta(params: ArmParams, ordering: Sequence[int], position: int) -> float:
    """Closed form of ``r(L) - r(L with positions position, position+1 swapped)``.

    Positive exactly when the earlier arm has the strictly smaller error
    probability (and both trigger probabilities are nonzero).
    """
    ordering = validate_ordering(ordering, params.K)
    if not 0 <= position < params.K - 1:
        raise ValueError(f"position {position} outside 0..{params.K - 2}")
    mu, p = params.mu, params.p
    prefix = 1.0
    for arm in ordering[:position]:
        prefix *= 1.0 - mu[arm]
    a, b = ordering[position], ordering[position + 1]
    return prefix * mu[a] * mu[b] * (p[b] - p[a])


def suboptimality_gap(params: ArmParams, ordering: Sequence[int]) -> float:
    """Reward shortfall of ``ordering`` against the optimal ordering.

    Clamped at zero so that orderings tied with the optimum (equal error
    probabilities) never report a rounding-level negative gap.
    """
    ordering = validate_ordering(ordering, params.K)
    best = _reward(params.mu, params.p, optimal_ordering(params))
    return max(0.0, best - _reward(params.mu, params.p, ordering))


per_slot_regret = suboptimality_gap


def gap_stats(params: ArmParams, limit: int = ENUMERATION_LIMIT) -> GapStats:
    """Worst gap per leading arm, and the extreme gaps, by full enumeration."""
    K = params.K
    if K > limit:
        raise UnsupportedSizeError(f"gap_stats enumerates {K}! orderings; limit is K <= {limit}")
    best = _reward(params.mu, params.p, optimal_ordering(params))
    per_arm = [0.0] * K
    smallest = math.inf
    for ordering in itertools.permutations(range(K)):
        gap = max(0.0, best - _reward(params.mu, params.p, ordering))
        lead = ordering[0]
        if gap > per_arm[lead]:
            per_arm[lead] = gap
        if 0.0 < gap < smallest:
            smallest = gap
    degenerate = smallest == math.inf
    return GapStats(
        per_arm=tuple(per_arm),
        max=max(per_arm),
        min=0.0 if degenerate else smallest,
        degenerate=degenerate,
    )


def neighbor_gaps(params: ArmParams) -> tuple[list[float], list[float]]:
    """Consecutive error-probability gaps over the arms sorted by ``p``.

    Returns ``(gaps, min_gaps)``: ``gaps[k] = p_(k+1) - p_(k)`` for the sorted
    values (K - 1 entries), and ``min_gaps[k]`` the smaller of the two gaps
    around the k-th sorted arm, one-sided for the first and last arm.
    """
    ps = sorted(params.p)
    if len(ps) < 2:
        return [], []
    gaps = [b - a for a, b in zip(ps, ps[1:])]
    min_gaps = [gaps[0]]
    min_gaps += [min(left, right) for left, right in zip(gaps, gaps[1:])]
    min_gaps.append(gaps[-1])
    return gaps, min_gaps
