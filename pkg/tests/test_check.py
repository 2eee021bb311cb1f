"""Exact checker: discounted values, long-run averages, PSem/ESem and their
optimizers, cross-checked against closed forms and brute-force enumeration."""
import numpy as np
import pytest

from ctsched.bruteforce import (brute_force_average, brute_force_discounted,
                                brute_force_esem, brute_force_psem,
                                random_ctmdp, random_marked_product,
                                random_reward_spec, random_schedule)
from ctsched.check import (BlackwellReport, RewardSpec, accepting_rate_spec,
                           alpha_from_gamma, average_optimal, average_value,
                           blackwell_probe, discounted_optimal,
                           discounted_value, esem_of, esem_optimal, psem_of,
                           psem_optimal, step_reward_spec,
                           uniformized_reward_spec)
from ctsched.model import Ctmdp, CtmdpError, uniformize
from ctsched.product import project_schedule, schedule_to_ids


def absorbing_pair(lam0=2.0, lam1=3.0):
    """State 0 jumps to the absorbing state 1 at rate lam0."""
    return Ctmdp.from_transitions(
        ("s0", "s1"), ("a",), 0,
        [(0, 0, 1, lam0), (1, 0, 1, lam1)])


def test_discounted_value_closed_form_state_reward():
    lam0, alpha = 2.0, 0.7
    m = absorbing_pair(lam0=lam0)
    spec = RewardSpec(state_rate=np.array([0.0, 1.0]))
    sigma = np.zeros(2, dtype=np.int64)
    v = discounted_value(m, spec, sigma, alpha)
    # earning rate 1 forever is worth 1/alpha; state 0 discounts the arrival
    assert v[1] == pytest.approx(1 / alpha, rel=1e-12)
    assert v[0] == pytest.approx(lam0 / (alpha * (lam0 + alpha)), rel=1e-12)


def test_discounted_value_closed_form_action_reward():
    lam1, alpha, c = 3.0, 0.5, 2.0
    m = absorbing_pair(lam1=lam1)
    spec = RewardSpec(state_rate=np.zeros(2), action_reward={(1, 0): c})
    sigma = np.zeros(2, dtype=np.int64)
    v = discounted_value(m, spec, sigma, alpha)
    # a reward of c per jump at rate lam1: v = c (lam1 + alpha) / alpha
    assert v[1] == pytest.approx(c * (lam1 + alpha) / alpha, rel=1e-12)


def test_discounted_value_rejects_bad_inputs():
    m = absorbing_pair()
    spec = RewardSpec(state_rate=np.zeros(2))
    with pytest.raises(CtmdpError):
        discounted_value(m, spec, np.zeros(2, dtype=np.int64), 0.0)
    with pytest.raises(CtmdpError):
        discounted_value(m, spec, np.array([1, 0]), 1.0)  # disabled action


def test_discounted_optimal_matches_brute_force():
    rng = np.random.default_rng(31)
    for _ in range(10):
        m = random_ctmdp(rng, num_states=5, max_schedules=500)
        spec = random_reward_spec(rng, m)
        alpha = float(rng.uniform(0.1, 2.0))
        v, sigma = discounted_optimal(m, spec, alpha)
        best = brute_force_discounted(m, spec, alpha)
        assert np.allclose(v, best, rtol=1e-9, atol=1e-9)
        # the returned schedule attains the optimum
        assert np.allclose(discounted_value(m, spec, sigma, alpha), best,
                           rtol=1e-9, atol=1e-9)


def test_average_value_closed_forms():
    lam1 = 3.0
    m = absorbing_pair(lam1=lam1)
    sigma = np.zeros(2, dtype=np.int64)
    spec = RewardSpec(state_rate=np.array([0.0, 1.0]))
    g = average_value(m, spec, sigma)
    # the chain is absorbed in state 1, which earns 1 per unit time
    assert np.allclose(g, [1.0, 1.0])
    spec = RewardSpec(state_rate=np.zeros(2), action_reward={(1, 0): 2.0})
    g = average_value(m, spec, sigma)
    # 2 per jump at lam1 jumps per unit time
    assert np.allclose(g, [2 * lam1, 2 * lam1])


def test_average_value_splits_across_bsccs():
    # two absorbing states with different earning rates
    m = Ctmdp.from_transitions(
        ("s0", "s1", "s2"), ("a",), 0,
        [(0, 0, 1, 1.0), (0, 0, 2, 3.0), (1, 0, 1, 1.0), (2, 0, 2, 1.0)])
    spec = RewardSpec(state_rate=np.array([0.0, 1.0, 0.0]))
    g = average_value(m, spec, np.zeros(3, dtype=np.int64))
    assert g[1] == pytest.approx(1.0)
    assert g[2] == pytest.approx(0.0)
    # 1/4 chance of landing in the earning state
    assert g[0] == pytest.approx(0.25)


def test_average_optimal_matches_brute_force():
    rng = np.random.default_rng(47)
    for _ in range(10):
        m = random_ctmdp(rng, num_states=5, max_schedules=500)
        spec = random_reward_spec(rng, m)
        g_opt, sigma = average_optimal(m, spec)
        best_gains, _ = brute_force_average(m, spec)
        assert np.allclose(g_opt, best_gains, rtol=1e-8, atol=1e-8)
        achieved = average_value(m, spec, sigma)
        assert np.allclose(achieved, best_gains, rtol=1e-8, atol=1e-8)


def test_psem_of_mars_never_b(mars):
    m, a, p = mars
    aidx = {n: j for j, n in enumerate(p.ctmdp.action_names)}
    sigma = np.array([p.ctmdp.enabled(s)[0] for s in range(p.num_states)])
    sidx = {n: i for i, n in enumerate(p.ctmdp.state_names)}
    sigma[sidx["(z=0,q0)"]] = aidx["a>q0"]
    sigma[sidx["(z=0,q1)"]] = aidx["a>q0"]
    from ctsched.product import schedule_from_ids
    res = psem_of(p, schedule_from_ids(p, sigma))
    # the a-c cycle visits the g zone forever and never risks zone 1
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.values[sidx["(z=1,q2)"]] == 0.0


def test_psem_optimal_matches_brute_force():
    rng = np.random.default_rng(53)
    for _ in range(10):
        p = random_marked_product(rng, num_states=5, max_schedules=500)
        opt = psem_optimal(p)
        best, _ = brute_force_psem(p)
        assert opt.value == pytest.approx(best, abs=1e-9)
        # the witnessing schedule must actually achieve the value
        assert psem_of(p, opt.schedule).value == pytest.approx(best, abs=1e-9)


def test_esem_optimal_matches_brute_force():
    rng = np.random.default_rng(59)
    for _ in range(10):
        p = random_marked_product(rng, num_states=5, max_schedules=500)
        opt = esem_optimal(p)
        best, _ = brute_force_esem(p)
        assert opt.value == pytest.approx(best, abs=1e-9)
        assert esem_of(p, opt.schedule).value == pytest.approx(best, abs=1e-9)


def test_esem_values_lie_in_unit_interval():
    rng = np.random.default_rng(61)
    for _ in range(10):
        p = random_marked_product(rng, num_states=6)
        sched = random_schedule(rng, p)
        vals = esem_of(p, sched).values
        assert np.all(vals >= -1e-12) and np.all(vals <= 1 + 1e-12)


def test_riskreward_exact_objectives(riskreward):
    _, _, p = riskreward
    assert psem_optimal(p).value == pytest.approx(1.0, abs=1e-9)
    assert esem_optimal(p).value == pytest.approx(0.9, abs=1e-9)


def test_mars_exact_objectives(mars):
    m, a, p = mars
    sat = psem_optimal(p)
    assert sat.value == pytest.approx(1.0, abs=1e-9)
    exp = esem_optimal(p)
    assert exp.value == pytest.approx(0.75, abs=1e-9)
    act, _ = exp.schedule[(m.initial, a.initial)]
    assert m.action_names[act] == "b"


def test_alpha_from_gamma():
    assert alpha_from_gamma(0.5, 4.0) == pytest.approx(4.0)
    with pytest.raises(CtmdpError):
        alpha_from_gamma(1.0, 4.0)


def test_uniformized_reward_spec_preserves_discounted_values():
    rng = np.random.default_rng(67)
    for _ in range(5):
        m = random_ctmdp(rng, num_states=5)
        spec = random_reward_spec(rng, m)
        alpha = float(rng.uniform(0.2, 1.5))
        cap = m.max_exit_rate
        sigma = np.array([int(rng.choice(m.enabled(s)))
                          for s in range(m.num_states)])
        v1 = discounted_value(m, spec, sigma, alpha)
        v2 = discounted_value(uniformize(m),
                              uniformized_reward_spec(m, spec, alpha, cap),
                              sigma, alpha)
        assert np.allclose(v1, v2, rtol=1e-10, atol=1e-10)


def test_step_reward_spec_scaling():
    m = absorbing_pair(lam0=2.0, lam1=3.0)
    spec = RewardSpec(state_rate=np.array([1.0, 0.0]),
                      action_reward={(0, 0): 4.0})
    steps = step_reward_spec(m, spec, cap=3.0)
    # (state rate + lam * action reward) / cap
    assert steps[(0, 0)] == pytest.approx((1.0 + 2.0 * 4.0) / 3.0)
    assert steps[(1, 0)] == pytest.approx(0.0)


def test_blackwell_probe_stabilizes(riskreward):
    _, _, p = riskreward
    spec = accepting_rate_spec(p.num_states, p.accepting)
    report = blackwell_probe(p.ctmdp, spec,
                             gammas=[0.9, 0.99, 0.999, 0.9999, 0.99999])
    assert isinstance(report, BlackwellReport)
    assert report.stabilized
    # the stabilized discounted choice is gain-optimal
    stable = np.array(report.schedules[-1], dtype=np.int64)
    g_opt, _ = average_optimal(p.ctmdp, spec)
    g_stable = average_value(p.ctmdp, spec, stable)
    assert np.allclose(g_stable, g_opt, atol=1e-9)
