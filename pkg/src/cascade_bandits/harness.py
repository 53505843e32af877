"""Replicated regret experiments.

Regret is charged analytically: slot ``t`` costs ``r(L*) - r(L_t)`` for the
ordering the policy proposed, computed from the true parameters. Realised
rewards only drive what the policy observes.

Seeds: each run gets an environment seed and a policy seed from
:func:`derive`. The environment seed ignores the policy index, so every
policy in a given (horizon, run) cell faces the same arm outputs.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .core import ArmParams, Ordering, optimal_ordering, per_slot_regret
from .env import RngStream, censor, step
from .policies import POLICY_NAMES, Policy, make_policy

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_ENV_TAG = 0x656E76  # "env"
_POLICY_TAG = 0x706F6C  # "pol"
LOG_GRID_RATIO = 1.2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    params: ArmParams
    horizons: tuple[int, ...]
    runs: int
    master_seed: int
    policies: tuple[str, ...]
    checkpoint_schedule: str = "log"

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError(f"runs = {self.runs} must be >= 1")
        if not self.horizons:
            raise ConfigError("horizons must be nonempty")
        for i, T in enumerate(self.horizons):
            if T < 1:
                raise ConfigError(f"horizons[{i}] = {T} must be >= 1")
        if not self.policies:
            raise ConfigError("policies must be nonempty")
        for name in self.policies:
            if name not in POLICY_NAMES:
                raise ConfigError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigError(f"master_seed = {self.master_seed} is not an unsigned 64-bit integer")
        checkpoints(self.checkpoint_schedule, 1)  # validates the schedule string


@dataclass
class RegretTrajectory:
    checkpoints: list[tuple[int, float]]
    orderings: Optional[list[Ordering]] = None

    @property
    def final(self) -> float:
        return self.checkpoints[-1][1]

    def at(self, t: int) -> float:
        for s, value in self.checkpoints:
            if s == t:
                return value
        raise KeyError(f"slot {t} is not a checkpoint")


@dataclass
class AggregateCurve:
    t: list[int]
    mean: list[float]
    stderr: list[float]
    runs: int
    # stderr is reported as 0 when there is a single run
    degenerate: bool = False
    finals: list[float] = field(default_factory=list)


def _splitmix(z: int) -> int:
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _hash_words(*words: int) -> int:
    h = 0
    for w in words:
        h = _splitmix(h ^ (w & MASK64))
    return h


def derive(master_seed: int, policy_index: int, horizon_index: int, run_index: int) -> tuple[int, int]:
    """``(env_seed, policy_seed)`` for one run.

    Each seed is a chain of SplitMix64 finalisers over a domain tag and the
    indices. Every chain step is a bijection of the running state, so
    distinct final indices never collide.
    """
    env_seed = _hash_words(master_seed, _ENV_TAG, horizon_index, run_index)
    policy_seed = _hash_words(master_seed, _POLICY_TAG, policy_index, horizon_index, run_index)
    if policy_seed == env_seed:
        policy_seed ^= 1
    return env_seed, policy_seed


def checkpoints(schedule: str, horizon: int) -> list[int]:
    """Slots at which cumulative regret is recorded; always ends at ``horizon``.

    ``"linear:<step>"`` gives step, 2*step, ...; ``"log"`` gives the
    rounded-up powers of 1.2 (1, 2, 3, ..., 9, 11, 13, ...).
    """
    if schedule == "log":
        points = set()
        x = 1.0
        while x <= horizon:
            points.add(math.ceil(x - 1e-9))
            x *= LOG_GRID_RATIO
    elif schedule.startswith("linear:"):
        try:
            stride = int(schedule.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad checkpoint schedule {schedule!r}") from None
        if stride < 1:
            raise ConfigError(f"checkpoint step must be >= 1 in {schedule!r}")
        points = set(range(stride, horizon + 1, stride))
    else:
        raise ConfigError(f"checkpoint_schedule must be 'log' or 'linear:<step>', got {schedule!r}")
    points.add(horizon)
    return sorted(p for p in points if 1 <= p <= horizon)


def simulate(policy: Policy, params: ArmParams, horizon: int, env_rng: RngStream,
             marks: Iterable[int], record_orderings: bool = False) -> RegretTrajectory:
    """Run one policy for ``horizon`` slots, recording cumulative regret at ``marks``."""
    marks = sorted(set(marks) | {horizon})
    best = optimal_ordering(params)
    regret_of: dict[Ordering, float] = {best: 0.0}
    cum = 0.0
    out = []
    seen = [] if record_orderings else None
    next_mark = iter(marks)
    mark = next(next_mark)
    for t in range(1, horizon + 1):
        ordering = policy.propose(t)
        r = regret_of.get(ordering)
        if r is None:
            r = regret_of[ordering] = per_slot_regret(params, ordering)
        cum += r
        if seen is not None:
            seen.append(ordering)
        policy.observe(t, censor(step(params, ordering, env_rng)))
        if t == mark:
            out.append((t, cum))
            mark = next(next_mark, None)
    return RegretTrajectory(out, seen)


def run_episode(policy_name: str, params: ArmParams, horizon: int, run_seed: tuple[int, int],
                schedule: str = "log", marks: Optional[Iterable[int]] = None,
                record_orderings: bool = False, return_policy: bool = False):
    """One replication of a named policy. ``run_seed`` is ``(env_seed, policy_seed)``."""
    if policy_name not in POLICY_NAMES:
        raise ConfigError(f"unknown policy {policy_name!r}")
    env_seed, policy_seed = run_seed
    policy = make_policy(policy_name, params, horizon, np.random.default_rng(policy_seed))
    if marks is None:
        marks = checkpoints(schedule, horizon)
    traj = simulate(policy, params, horizon, RngStream(env_seed), marks, record_orderings)
    return (traj, policy) if return_policy else traj


def aggregate(trajectories: Sequence[RegretTrajectory]) -> AggregateCurve:
    n = len(trajectories)
    values = np.array([[v for _, v in tr.checkpoints] for tr in trajectories])
    ts = [t for t, _ in trajectories[0].checkpoints]
    mean = values.mean(axis=0)
    if n > 1:
        stderr = values.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        stderr = np.zeros(len(ts))
    return AggregateCurve(ts, mean.tolist(), stderr.tolist(), n, degenerate=n == 1,
                          finals=values[:, -1].tolist())


def _run_task(task):
    name, params, horizon, seeds, schedule = task
    return run_episode(name, params, horizon, seeds, schedule)


def run_experiment(config: ExperimentConfig, workers: int = 1,
                   only: Optional[Iterable[str]] = None,
                   progress: Optional[Callable[[str, int], None]] = None
                   ) -> dict[tuple[str, int], AggregateCurve]:
    """Every (policy, horizon) cell over ``config.runs`` replications.

    With ``workers > 1`` runs are spread over processes; results are
    aggregated in run-index order either way, so the output does not depend
    on ``workers``. ``only`` restricts the policies run without changing
    their seeds.
    """
    if only is not None:
        only = set(only)
        unknown = only - set(config.policies)
        if unknown:
            raise ConfigError(f"policies {sorted(unknown)} are not in the config")
    cells = []
    for pi, name in enumerate(config.policies):
        if only is not None and name not in only:
            continue
        for hi, T in enumerate(config.horizons):
            tasks = [(name, config.params, T, derive(config.master_seed, pi, hi, r),
                      config.checkpoint_schedule) for r in range(config.runs)]
            cells.append(((name, T), tasks))

    results = {}
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for key, tasks in cells:
            try:
                if pool is None:
                    trajs = [_run_task(task) for task in tasks]
                else:
                    trajs = list(pool.map(_run_task, tasks))
            except Exception as exc:
                raise RuntimeError(f"cell policy={key[0]} T={key[1]} failed: {exc}") from exc
            results[key] = aggregate(trajs)
            log.info("cell %s T=%d: mean final regret %.4f", key[0], key[1], results[key].mean[-1])
            if progress is not None:
                progress(*key)
    finally:
        if pool is not None:
            pool.shutdown()
    return results
