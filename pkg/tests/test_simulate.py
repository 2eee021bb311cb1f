"""Trajectory sampling: rng streams, dwell times, episodes, CSV dumps."""
import numpy as np
import pytest

from ctsched.model import ActionNotEnabled, Ctmdp
from ctsched.simulate import (MaterializedEnv, RngHandle, Step, Trajectory,
                              make_rngs, run_episode, sample_dwell,
                              sample_transition, trajectory_csv)


def chain():
    return Ctmdp.from_transitions(
        ("s0", "s1"), ("a", "b"), 0,
        [(0, 0, 0, 1.0), (0, 0, 1, 3.0), (0, 1, 1, 6.0), (1, 0, 0, 2.0)])


def test_rng_streams_are_reproducible_and_distinct():
    a1 = [RngHandle(42, "trajectory").uniform() for _ in range(1)][0]
    a2 = RngHandle(42, "trajectory").uniform()
    assert a1 == a2
    draws = {name: RngHandle(42, name).uniform()
             for name in ("trajectory", "coin", "exploration")}
    assert len(set(draws.values())) == 3
    assert RngHandle(43, "trajectory").uniform() != a1


def test_rng_unknown_stream():
    with pytest.raises(ValueError):
        RngHandle(0, "weather")


def test_rng_integers_range():
    rng = RngHandle(1, "exploration")
    picks = [rng.integers(3) for _ in range(1000)]
    assert set(picks) == {0, 1, 2}


def test_make_rngs_covers_all_streams():
    rngs = make_rngs(5)
    assert set(rngs) == {"trajectory", "coin", "exploration"}


def test_sample_dwell_matches_exponential_mean():
    rng = RngHandle(3, "trajectory")
    lam = 2.5
    xs = np.array([sample_dwell(lam, rng) for _ in range(50000)])
    assert xs.mean() == pytest.approx(1 / lam, rel=0.02)
    assert np.all(xs >= 0)


def test_sample_transition_frequencies():
    m = chain()
    rng = RngHandle(11, "trajectory")
    n = 40000
    hits = {0: 0, 1: 0}
    for _ in range(n):
        t, dwell = sample_transition(m, 0, 0, rng)
        hits[t] += 1
        assert dwell > 0
    # rates 1 : 3 over exit rate 4
    assert hits[0] / n == pytest.approx(0.25, abs=0.01)
    assert hits[1] / n == pytest.approx(0.75, abs=0.01)


def test_run_episode_stop_and_truncation():
    m = chain()
    env = MaterializedEnv(m, accepting={1})
    rng = RngHandle(0, "trajectory")
    traj = run_episode(env, policy=lambda s: 0,
                       reward=lambda s, a, t, d: d if s == 1 else 0.0,
                       stop=lambda step, count: count >= 10,
                       rng=rng)
    assert len(traj.steps) == 10
    assert not traj.truncated
    rng = RngHandle(0, "trajectory")
    traj = run_episode(env, policy=lambda s: 0,
                       reward=lambda s, a, t, d: 0.0,
                       stop=lambda step, count: False,
                       rng=rng, max_steps=7)
    assert len(traj.steps) == 7
    assert traj.truncated


def test_run_episode_rejects_disabled_action():
    m = chain()
    env = MaterializedEnv(m)
    with pytest.raises(ActionNotEnabled):
        run_episode(env, policy=lambda s: 1 if s == 1 else 0,
                    reward=lambda *args: 0.0,
                    stop=lambda step, count: count >= 100,
                    rng=RngHandle(0, "trajectory"))


def test_trajectory_accumulators():
    traj = Trajectory()
    traj.append(Step(0, 0, 1, 0.5, 1.0))
    traj.append(Step(1, 0, 0, 0.25, 0.0))
    assert traj.total_time == pytest.approx(0.75)
    assert traj.total_reward == pytest.approx(1.0)
    assert np.allclose(traj.timestamps(), [0.5, 0.75])


def test_trajectory_csv_shape():
    traj = Trajectory()
    traj.append(Step(0, 1, 1, 0.125, 0.0))
    text = trajectory_csv(traj, state_name=lambda s: f"s{s}",
                          action_name=lambda a: "ab"[a])
    lines = text.strip().split("\n")
    assert lines[0] == "step,state,action,next,dwell,reward"
    assert lines[1] == "0,s0,b,s1,0.125,0"


def test_same_seed_same_trajectory():
    m = chain()
    env = MaterializedEnv(m)

    def roll():
        rng = RngHandle(17, "trajectory")
        return run_episode(env, policy=lambda s: 0,
                           reward=lambda *a: 0.0,
                           stop=lambda step, count: count >= 50,
                           rng=rng)

    t1, t2 = roll(), roll()
    assert t1.steps == t2.steps
