import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cascade_bandits.core import ArmParams, expected_reward
from cascade_bandits.env import Observation, RngStream, SlotOutcome, censor, step, step_many

from conftest import PAPER_REWARD


def test_stream_matches_pcg64_sequence():
    rng = RngStream(42, block=4)
    got = np.concatenate([rng.uniforms(3), rng.uniforms(5), rng.uniforms(1)])
    expected = np.random.Generator(np.random.PCG64(42)).random(9)
    assert np.array_equal(got, expected)
    assert rng.position == 9


def test_deterministic_outcomes(paper):
    a, b = RngStream(5), RngStream(5)
    for _ in range(1000):
        assert step(paper, (2, 0, 4, 1, 3), a) == step(paper, (2, 0, 4, 1, 3), b)


def test_certain_triggers_no_errors():
    params = ArmParams((1.0, 1.0, 1.0), (0.0, 0.0, 0.0))
    rng = RngStream(1)
    for _ in range(50):
        out = step(params, (1, 2, 0), rng)
        assert out.selected == (1, 0)
        assert out.feedback == 1 and out.reward == 1


def test_nothing_fires_still_consumes_k_plus_one():
    params = ArmParams((0.0,) * 4, (0.5,) * 4)
    rng = RngStream(3)
    out = step(params, (0, 1, 2, 3), rng)
    assert out.selected is None and out.feedback is None and out.reward == 0
    assert rng.position == 5


@given(st.integers(0, 2**64 - 1), st.permutations([0, 1, 2, 3, 4]))
def test_draw_count_and_outcome_invariants(seed, ordering):
    params = ArmParams((0.3, 0.1, 0.5, 0.05, 0.2), (0.1, 0.9, 0.4, 0.2, 0.6))
    rng = RngStream(seed)
    ordering = tuple(ordering)
    for n in range(1, 30):
        out = step(params, ordering, rng)
        assert rng.position == 6 * n
        assert (out.selected is not None) == any(out.x)
        if out.selected is None:
            assert out.reward == 0 and out.feedback is None
        else:
            arm, pos = out.selected
            assert ordering[pos] == arm and out.x[arm] == 1
            assert all(out.x[a] == 0 for a in ordering[:pos])
            assert out.reward == out.feedback


def test_triggers_do_not_depend_on_ordering(paper):
    a, b = RngStream(11), RngStream(11)
    for _ in range(500):
        assert step(paper, (0, 1, 2, 3, 4), a).x == step(paper, (4, 3, 2, 1, 0), b).x


def test_step_many_equals_repeated_step(paper):
    ordering = (3, 1, 0, 4, 2)
    a, b = RngStream(9), RngStream(9)
    x, selected, feedback = step_many(paper, ordering, a, 2000)
    for i in range(2000):
        out = step(paper, ordering, b)
        assert tuple(x[i]) == out.x
        assert selected[i] == (-1 if out.selected is None else out.selected[0])
        assert feedback[i] == out.reward
    assert a.position == b.position


def test_mean_reward_paper_instance(paper):
    n = 10**6
    _, _, feedback = step_many(paper, (0, 1, 2, 3, 4), RngStream(2024), n)
    mean = feedback.mean()
    se = feedback.std(ddof=1) / math.sqrt(n)
    assert abs(mean - PAPER_REWARD) <= 3 * se


class TestCensor:
    def test_projection(self):
        out = SlotOutcome((0, 1, 1), (2, 1), 0, 0)
        assert censor(out) == Observation(2, 0)

    def test_nothing_selected(self):
        assert censor(SlotOutcome((0, 0), None, None, 0)) == Observation(None, None)

    @given(st.integers(0, 2**32))
    def test_only_selected_arm_and_feedback(self, seed):
        params = ArmParams((0.5,) * 4, (0.3,) * 4)
        out = step(params, (3, 2, 1, 0), RngStream(seed))
        obs = censor(out)
        assert obs._fields == ("selected_arm", "feedback")
        assert (obs.selected_arm is None) == (obs.feedback is None)
        assert not hasattr(obs, "x")
