import numpy as np
import pytest

from cascade_bandits.core import ArmParams, optimal_ordering, per_slot_regret, suboptimality_gap
from cascade_bandits.env import Observation, RngStream
from cascade_bandits.harness import (
    ConfigError,
    ExperimentConfig,
    aggregate,
    checkpoints,
    derive,
    run_episode,
    run_experiment,
    simulate,
)


class Fixed:
    """Clairvoyant stand-in that always plays one ordering."""

    def __init__(self, ordering):
        self.ordering = tuple(ordering)
        self.seen = []

    def propose(self, t):
        return self.ordering

    def observe(self, t, obs):
        assert type(obs) is Observation
        self.seen.append(obs)


class TestDerive:
    def test_deterministic(self):
        assert derive(123, 1, 2, 3) == derive(123, 1, 2, 3)

    def test_env_seed_ignores_policy(self):
        env_a, pol_a = derive(99, 0, 1, 5)
        env_b, pol_b = derive(99, 3, 1, 5)
        assert env_a == env_b and pol_a != pol_b

    def test_env_and_policy_seeds_differ(self):
        for r in range(200):
            env, pol = derive(7, 0, 0, r)
            assert env != pol

    def test_no_collisions_over_runs(self):
        envs = {derive(2025, 0, 0, r)[0] for r in range(10_000)}
        assert len(envs) == 10_000

    def test_fits_64_bits(self):
        env, pol = derive(2**64 - 1, 3, 5, 10_000)
        assert 0 <= env < 2**64 and 0 <= pol < 2**64


class TestCheckpoints:
    def test_linear(self):
        assert checkpoints("linear:4", 10) == [4, 8, 10]

    def test_log(self):
        pts = checkpoints("log", 50_000)
        assert pts[:11] == [1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 13]
        assert pts[-1] == 50_000
        assert len(pts) < 70

    @pytest.mark.parametrize("bad", ["lin:3", "linear:0", "linear:x", "geometric"])
    def test_bad(self, bad):
        with pytest.raises(ConfigError):
            checkpoints(bad, 10)


class TestSimulate:
    def test_optimal_policy_zero_regret(self, paper):
        traj = simulate(Fixed(optimal_ordering(paper)), paper, 2000, RngStream(1), [500, 1000])
        assert all(v == 0.0 for _, v in traj.checkpoints)
        assert traj.checkpoints[-1][0] == 2000

    def test_fixed_suboptimal_is_linear(self, paper):
        worst = (4, 3, 2, 1, 0)
        gap = suboptimality_gap(paper, worst)
        traj = simulate(Fixed(worst), paper, 3000, RngStream(1), [1, 1000])
        expected = 0.0
        for _ in range(3000):
            expected += gap
        assert traj.final == expected
        assert traj.final == pytest.approx(3000 * gap, rel=1e-12)

    def test_policy_sees_only_observations(self, paper):
        policy = Fixed((2, 1, 0, 4, 3))
        simulate(policy, paper, 500, RngStream(2), [])
        assert len(policy.seen) == 500

    @pytest.mark.parametrize("name", ["ec", "ae", "lcb", "ts"])
    def test_replay_matches(self, paper, name):
        traj = run_episode(name, paper, 3000, derive(5, 0, 0, 0), schedule="linear:100",
                           record_orderings=True)
        cum, replay = 0.0, {}
        for t, ordering in enumerate(traj.orderings, start=1):
            cum += per_slot_regret(paper, ordering)
            replay[t] = cum
        for t, value in traj.checkpoints:
            assert value == replay[t]
        values = [v for _, v in traj.checkpoints]
        assert values[0] >= 0 and all(a <= b for a, b in zip(values, values[1:]))

    def test_unknown_policy(self, paper):
        with pytest.raises(ConfigError):
            run_episode("ucb", paper, 10, (1, 2))


def small_config(**kw):
    base = dict(params=ArmParams((0.6, 0.7, 0.8), (0.1, 0.3, 0.5)), horizons=(200, 500),
                runs=3, master_seed=11, policies=("ec", "ae", "lcb", "ts"),
                checkpoint_schedule="linear:100")
    base.update(kw)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_cells(self):
        res = run_experiment(small_config())
        assert set(res) == {(p, T) for p in ("ec", "ae", "lcb", "ts") for T in (200, 500)}
        curve = res["lcb", 500]
        assert curve.t == [100, 200, 300, 400, 500]
        assert curve.runs == 3 and not curve.degenerate

    def test_single_run_degenerate(self):
        res = run_experiment(small_config(runs=1, policies=("ts",), horizons=(100,)))
        assert res["ts", 100].stderr == [0.0]
        assert res["ts", 100].degenerate

    def test_deterministic(self):
        a = run_experiment(small_config())
        b = run_experiment(small_config())
        assert a == b

    def test_parallel_equals_serial(self):
        assert run_experiment(small_config(), workers=1) == run_experiment(small_config(), workers=2)

    def test_filter_keeps_seeds(self):
        full = run_experiment(small_config())
        part = run_experiment(small_config(), only=["ts"])
        assert set(part) == {("ts", 200), ("ts", 500)}
        assert part["ts", 500] == full["ts", 500]

    def test_filter_rejects_unconfigured(self):
        with pytest.raises(ConfigError):
            run_experiment(small_config(policies=("ts",)), only=["ec"])

    def test_aggregate_stats(self, paper):
        trajs = [run_episode("ts", paper, 300, derive(1, 0, 0, r), schedule="linear:300") for r in range(4)]
        curve = aggregate(trajs)
        finals = np.array([tr.final for tr in trajs])
        assert curve.mean == [finals.mean()]
        assert curve.stderr[0] == pytest.approx(finals.std(ddof=1) / 2, rel=1e-12)

    @pytest.mark.parametrize("kw", [dict(runs=0), dict(horizons=()), dict(horizons=(0,)),
                                    dict(policies=()), dict(policies=("ucb",)),
                                    dict(master_seed=-1), dict(checkpoint_schedule="x")])
    def test_invalid_config(self, kw):
        with pytest.raises(ConfigError):
            small_config(**kw)
