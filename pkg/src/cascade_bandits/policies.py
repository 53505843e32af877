"""Online ordering policies: Explore-then-Commit, Action Elimination, LCB, Thompson Sampling.

All policies share one protocol. ``propose(t)`` is called once at the start
of slot ``t`` (1-based) and returns an ordering; ``observe(t, obs)`` is then
called with the censored :class:`~cascade_bandits.env.Observation` for that
slot. Each policy owns a private ``numpy.random.Generator``.

Confidence widths use the natural logarithm. Ties are broken by ascending
arm index unless stated otherwise.
"""

from __future__ import annotations

import math
from typing import Protocol, Sequence

import numpy as np

from .core import ArmParams, Ordering, neighbor_gaps
from .env import Observation

POLICY_NAMES = ("ec", "ae", "lcb", "ts")

NEG_INF = -math.inf


class Policy(Protocol):
    def propose(self, t: int) -> Ordering: ...

    def observe(self, t: int, obs: Observation) -> None: ...


class CountingStats:
    """Per-arm observation counts and empirical error rates."""

    def __init__(self, K: int):
        self.K = K
        self.counts = [0] * K
        self.p_hat = [0.0] * K  # meaningless while counts[i] == 0

    def update(self, arm: int, feedback: int) -> None:
        self.counts[arm] += 1
        self.p_hat[arm] += (1 - feedback - self.p_hat[arm]) / self.counts[arm]

    def width(self, arm: int, log_term: float) -> float:
        s = self.counts[arm]
        return math.inf if s == 0 else math.sqrt(2.0 * log_term / s)

    def lower(self, arm: int, log_term: float) -> float:
        if self.counts[arm] == 0:
            return NEG_INF
        return self.p_hat[arm] - self.width(arm, log_term)

    def upper(self, arm: int, log_term: float) -> float:
        if self.counts[arm] == 0:
            return math.inf
        return self.p_hat[arm] + self.width(arm, log_term)

    @property
    def total(self) -> int:
        return sum(self.counts)


def _rotate(ordering: Sequence[int]) -> Ordering:
    return tuple(ordering[1:]) + (ordering[0],)


def _ascending(arms, keys) -> Ordering:
    return tuple(sorted(arms, key=lambda i: (keys[i], i)))


def ec_budget(deltas: Sequence[float], mu: Sequence[float], horizon: int) -> int:
    """Per-arm exploration count ``max_i ceil(16 log T / (delta_i^2 mu_i))``.

    ``deltas[k]`` is the gap between the (k+1)-th and (k+2)-th smallest error
    probabilities and pairs with ``mu[k + 1]``: the best arm has no gap of its
    own, so ``mu[0]`` does not enter the budget.
    """
    if len(deltas) != len(mu) - 1:
        raise ValueError(f"expected {len(mu) - 1} gaps for {len(mu)} arms, got {len(deltas)}")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    for k, d in enumerate(deltas):
        if not d > 0:
            raise ValueError(f"gap {k} = {d!r} must be positive")
    for i, m in enumerate(mu):
        if not m > 0:
            raise ValueError(f"mu[{i}] = {m!r} must be positive")
    if len(deltas) == 0:
        return 0
    log_t = math.log(horizon)
    return max(math.ceil(16.0 * log_t / (d * d * m)) for d, m in zip(deltas, mu[1:]))


class ExploreThenCommit:
    """Round-robin exploration for ``N * K`` slots, then a frozen ordering by ascending LCB."""

    name = "ec"

    def __init__(self, deltas, mu, horizon: int, rng: np.random.Generator):
        self.K = len(mu)
        self.horizon = horizon
        self.budget = ec_budget(deltas, mu, horizon)
        self.explore_slots = self.budget * self.K
        self.stats = CountingStats(self.K)
        self._log_t = math.log(horizon)
        self._current = tuple(int(a) for a in rng.permutation(self.K))
        self.committed: Ordering | None = None

    @property
    def commits(self) -> bool:
        return self.explore_slots < self.horizon

    def propose(self, t: int) -> Ordering:
        if t <= self.explore_slots:
            return self._current
        if self.committed is None:
            lcb = [self.stats.lower(i, self._log_t) for i in range(self.K)]
            self.committed = _ascending(range(self.K), lcb)
        return self.committed

    def observe(self, t: int, obs: Observation) -> None:
        if obs.selected_arm is not None:
            self.stats.update(obs.selected_arm, obs.feedback)
        if t <= self.explore_slots:
            self._current = _rotate(self._current)


class ActionElimination:
    """Rotates the active arms in front; arms whose confidence interval separates
    from every other active arm move to the inactive tail, kept in LCB order.

    Once at most one arm is active, every slot plays all arms in ascending LCB
    order.
    """

    name = "ae"

    def __init__(self, K: int, horizon: int, rng: np.random.Generator):
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        self.K = K
        self.horizon = horizon
        self.stats = CountingStats(K)
        self._log_t = math.log(horizon)
        self.active_list: list[int] = [int(a) for a in rng.permutation(K)]
        self.inactive: set[int] = set()
        # slot in which the active set shrank to at most one arm
        self.active_phase_end: int | None = None
        self._next = tuple(self.active_list)

    @property
    def active(self) -> set[int]:
        return set(self.active_list)

    def propose(self, t: int) -> Ordering:
        return self._next

    def _separated(self, j: int, others) -> bool:
        lo, hi = self.stats.lower, self.stats.upper
        lj, uj = lo(j, self._log_t), hi(j, self._log_t)
        for i in others:
            if i == j:
                continue
            if not (uj < lo(i, self._log_t) or hi(i, self._log_t) < lj):
                return False
        return True

    def _eliminate(self) -> None:
        while len(self.active_list) > 1:
            gone = [j for j in self.active_list if self._separated(j, self.active_list)]
            if not gone:
                break
            self.active_list = [j for j in self.active_list if j not in gone]
            self.inactive.update(gone)

    def observe(self, t: int, obs: Observation) -> None:
        if obs.selected_arm is not None:
            self.stats.update(obs.selected_arm, obs.feedback)
        lcb = [self.stats.lower(i, self._log_t) for i in range(self.K)]
        if len(self.active_list) > 1:
            self._eliminate()
            if len(self.active_list) <= 1:
                self.active_phase_end = t
        if len(self.active_list) > 1:
            self.active_list = self.active_list[1:] + self.active_list[:1]
            self._next = tuple(self.active_list) + _ascending(self.inactive, lcb)
        else:
            self._next = _ascending(range(self.K), lcb)


class LowerConfidenceBound:
    """Anytime policy: arms in ascending order of ``p_hat - sqrt(2 log t / S)``.

    Arms never observed rank first, in a fresh random order each slot.
    """

    name = "lcb"

    def __init__(self, K: int, rng: np.random.Generator):
        self.K = K
        self.stats = CountingStats(K)
        self.rng = rng

    def lower_bounds(self, t: int) -> list[float]:
        log_t = max(math.log(t), 0.0)
        return [self.stats.lower(i, log_t) for i in range(self.K)]

    def propose(self, t: int) -> Ordering:
        lcb = self.lower_bounds(t)
        unseen = [i for i in range(self.K) if self.stats.counts[i] == 0]
        seen = [i for i in range(self.K) if self.stats.counts[i] > 0]
        head = tuple(unseen[k] for k in self.rng.permutation(len(unseen))) if unseen else ()
        return head + _ascending(seen, lcb)

    def observe(self, t: int, obs: Observation) -> None:
        if obs.selected_arm is not None:
            self.stats.update(obs.selected_arm, obs.feedback)


class ThompsonSampling:
    """Beta posterior over each arm's error probability; arms in ascending order of a posterior draw.

    Samples come from ``Generator.beta`` (ratio of two gamma variates), K
    draws per slot in arm-index order.
    """

    name = "ts"

    def __init__(self, K: int, rng: np.random.Generator):
        self.K = K
        self.rng = rng
        self.alpha = [1] * K
        self.beta = [1] * K

    def propose(self, t: int) -> Ordering:
        theta = self.rng.beta(self.alpha, self.beta).tolist()
        return _ascending(range(self.K), theta)

    def observe(self, t: int, obs: Observation) -> None:
        arm = obs.selected_arm
        if arm is not None:
            self.alpha[arm] += 1 - obs.feedback
            self.beta[arm] += obs.feedback

    def observations(self, arm: int) -> int:
        return self.alpha[arm] + self.beta[arm] - 2


def ec_inputs(params: ArmParams) -> tuple[list[float], list[float]]:
    """The gaps and trigger probabilities EC is given, both in ascending-p order."""
    gaps, _ = neighbor_gaps(params)
    by_p = sorted(range(params.K), key=lambda i: (params.p[i], i))
    return gaps, [params.mu[i] for i in by_p]


def make_policy(name: str, params: ArmParams, horizon: int, rng: np.random.Generator) -> Policy:
    """Build a policy by its registered name.

    EC is clairvoyant about the gaps and trigger probabilities; EC and AE
    both receive the horizon.
    """
    K = params.K
    if name == "ec":
        gaps, mu = ec_inputs(params)
        return ExploreThenCommit(gaps, mu, horizon, rng)
    if name == "ae":
        return ActionElimination(K, horizon, rng)
    if name == "lcb":
        return LowerConfidenceBound(K, rng)
    if name == "ts":
        return ThompsonSampling(K, rng)
    raise KeyError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
