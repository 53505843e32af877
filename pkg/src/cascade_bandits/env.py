"""Stochastic cascade environment.

Every slot consumes exactly K + 1 uniforms from the stream: one trigger draw
per arm in arm-index order (arm i fires iff ``u_i < mu_i``), then one feedback
draw (feedback is 1 iff ``u_K < 1 - p`` of the served arm). The feedback draw
is consumed even when no arm fires. Because the schedule never depends on the
ordering, two policies run on the same seed see the same arm outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .core import ArmParams, Ordering


class RngStream:
    """Seeded stream of uniform doubles backed by numpy's PCG64.

    Draws are served from a prefetched block, which yields exactly the same
    sequence as drawing them one at a time. ``position`` counts the doubles
    handed out so far.
    """

    def __init__(self, seed: int, block: int = 1 << 14):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))
        self._block = block
        self._buf = np.empty(0)
        self._i = 0
        self.position = 0

    def uniforms(self, n: int) -> np.ndarray:
        end = self._i + n
        if end > len(self._buf):
            rest = self._buf[self._i:]
            fresh = self._gen.random(max(self._block, n - len(rest)))
            self._buf = np.concatenate([rest, fresh])
            self._i, end = 0, n
        out = self._buf[self._i:end]
        self._i = end
        self.position += n
        return out


class Observation(NamedTuple):
    """What a policy is allowed to see of a slot."""

    selected_arm: Optional[int]
    feedback: Optional[int]


@dataclass(frozen=True)
class SlotOutcome:
    x: tuple[int, ...]
    # (arm, position) of the first arm in the ordering that fired
    selected: Optional[tuple[int, int]]
    feedback: Optional[int]
    reward: int


def step(params: ArmParams, ordering: Ordering, rng: RngStream) -> SlotOutcome:
    K = params.K
    u = rng.uniforms(K + 1).tolist()
    mu = params.mu
    x = tuple(1 if u[i] < mu[i] else 0 for i in range(K))
    for pos, arm in enumerate(ordering):
        if x[arm]:
            y = 1 if u[K] < 1.0 - params.p[arm] else 0
            return SlotOutcome(x, (arm, pos), y, y)
    return SlotOutcome(x, None, None, 0)


def step_many(params: ArmParams, ordering: Ordering, rng: RngStream, n: int):
    """Vectorised equivalent of ``n`` calls to :func:`step` with a fixed ordering.

    Returns ``(x, selected_arm, feedback)`` arrays; ``selected_arm`` is -1 and
    ``feedback`` is 0 in slots where no arm fired.
    """
    K = params.K
    u = rng.uniforms(n * (K + 1)).reshape(n, K + 1)
    x = u[:, :K] < np.asarray(params.mu)
    order = np.asarray(ordering)
    fired = x[:, order]
    any_fired = fired.any(axis=1)
    selected = np.where(any_fired, order[fired.argmax(axis=1)], -1)
    ok = 1.0 - np.asarray(params.p)[np.maximum(selected, 0)]
    feedback = np.where(any_fired, u[:, K] < ok, False)
    return x.astype(np.int8), selected, feedback.astype(np.int8)


def censor(outcome: SlotOutcome) -> Observation:
    if outcome.selected is None:
        return Observation(None, None)
    return Observation(outcome.selected[0], outcome.feedback)
