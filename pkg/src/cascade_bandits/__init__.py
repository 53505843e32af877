"""Simulator and benchmark harness for ordered-cascade bandits."""

from .core import (
    ArmParams,
    GapStats,
    Ordering,
    UnsupportedSizeError,
    adjacent_swap_delta,
    expected_reward,
    gap_stats,
    neighbor_gaps,
    optimal_ordering,
    per_slot_regret,
    suboptimality_gap,
)
from .env import Observation, RngStream, SlotOutcome, censor, step
from .harness import ExperimentConfig, derive, run_episode, run_experiment
from .policies import POLICY_NAMES, make_policy

__version__ = "0.1.0"
