"""Model-free Q-learning of schedules on the model x automaton product.

The product is never materialized: ``OnTheFlyProductEnv`` tracks a pair
(model state, automaton state) and exposes actions (a, q') that combine a
model action with a resolution of the automaton's nondeterminism.  Two
trainers share the Q machinery:

* ``learn_sat`` maximizes the probability of visiting accepting states
  forever.  Transitions out of accepting states pay 1 with probability
  1 - zeta; a payout ends the episode and the update bootstraps a terminal
  value of 0, so Q(s, a) estimates the probability that the episode ever
  pays out, which for zeta near 1 orders schedules by satisfaction
  probability.

* ``learn_exp`` maximizes the long-run fraction of time spent in accepting
  states.  The reward of a transition is its dwell time if the state being
  left is accepting; episodes have a fixed length.

Both discount by exp(-alpha * dwell): discounting in continuous time at rate
alpha, with alpha = C (1 - gamma) / gamma mapping a per-step discount gamma
at uniformization rate C onto the continuous clock.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from .automata import BuchiAutomaton, step
from .model import Ctmdp
from .product import (ActionPair, Schedule, StatePair, TRAP_ACTION, TRAP_PAIR,
                      _ap_map, automaton_letter)
from .simulate import RngHandle, make_rngs


# Default per-step discounts.  Satisfaction values live in [0, 1] and need a
# long horizon to separate recurrent classes, so gamma is pushed close to 1.
# Expectation values scale like gain / alpha, so the same gamma would produce
# Q magnitudes in the thousands that constant-step updates cannot reach within
# the episode budget; a shorter horizon keeps them O(10) while the greedy
# schedule already matches the long-run-average optimum.
SAT_GAMMA = 0.99999
EXP_GAMMA = 0.99


@dataclass
class Hyperparams:
    """Training configuration; the defaults suit models with rates around 1-10.

    ``gamma`` left as None picks a per-objective default: ``SAT_GAMMA`` when
    learning satisfaction probabilities, ``EXP_GAMMA`` when learning the
    expected fraction of accepting time.
    """

    gamma: Optional[float] = None  # per-step discount at the uniformization rate
    beta: float = 0.01          # learning rate
    epsilon: float = 0.1        # exploration probability
    zeta: float = 0.99          # accepting-state continuation probability
    ep_len: int = 300           # max steps per episode
    ep_n: int = 20000           # number of episodes
    tol: float = 0.01           # early-stop tolerance on the initial-state value
    decay_beta: bool = False    # use 1/visit-count learning rates instead
    alpha: Optional[float] = None  # continuous discount rate; overrides gamma

    def __post_init__(self):
        if self.gamma is not None and not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in (0,1), got {self.gamma}")
        if not (0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must lie in (0,1], got {self.beta}")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in [0,1], got {self.epsilon}")
        if not (0.0 < self.zeta < 1.0):
            raise ValueError(f"zeta must lie in (0,1), got {self.zeta}")
        if self.ep_len <= 0 or self.ep_n <= 0:
            raise ValueError("ep_len and ep_n must be positive")

    def alpha_for(self, uniform_rate: float, satisfaction: bool = True) -> float:
        if self.alpha is not None:
            return self.alpha
        gamma = self.gamma
        if gamma is None:
            gamma = SAT_GAMMA if satisfaction else EXP_GAMMA
        return uniform_rate * (1.0 - gamma) / gamma


class QTable:
    """Sparse Q-function over (state key, action key); unseen entries are 0."""

    def __init__(self):
        self.q: Dict[Tuple[StatePair, ActionPair], float] = {}
        self.visits: Dict[Tuple[StatePair, ActionPair], int] = {}

    def get(self, s: StatePair, a: ActionPair) -> float:
        return self.q.get((s, a), 0.0)

    def best(self, s: StatePair, actions: Tuple[ActionPair, ...]) -> Tuple[ActionPair, float]:
        """Greedy action and value; ties go to the earliest action."""
        best_a = actions[0]
        best_v = self.q.get((s, best_a), 0.0)
        for a in actions[1:]:
            v = self.q.get((s, a), 0.0)
            if v > best_v:
                best_a, best_v = a, v
        return best_a, best_v

    def value(self, s: StatePair, actions: Tuple[ActionPair, ...]) -> float:
        return self.best(s, actions)[1]

    def update(self, s: StatePair, a: ActionPair, beta: float, target: float):
        key = (s, a)
        old = self.q.get(key, 0.0)
        self.q[key] = (1.0 - beta) * old + beta * target
        self.visits[key] = self.visits.get(key, 0) + 1

    def visited_states(self) -> List[StatePair]:
        seen = []
        marked = set()
        for (s, _a) in self.q:
            if s not in marked:
                marked.add(s)
                seen.append(s)
        return seen


class OnTheFlyProductEnv:
    """Simulates the model x automaton product pair by pair.

    Per-pair transition data (action list, successor pairs, cumulative rates)
    is built lazily and cached, so only the reachable fragment is ever touched.
    """

    def __init__(self, m: Ctmdp, a: BuchiAutomaton):
        self.m = m
        self.a = a
        ap_map = _ap_map(m, a)
        self._letters = [automaton_letter(m, a, s, ap_map)
                         for s in range(m.num_states)]
        self._cache: Dict[StatePair, Tuple[Tuple[ActionPair, ...],
                                           Dict[ActionPair, tuple]]] = {}
        self._accepting = a.accepting

    def reset(self) -> StatePair:
        return (self.m.initial, self.a.initial)

    def is_accepting(self, pair: StatePair) -> bool:
        return pair[1] in self._accepting

    def _row(self, pair: StatePair):
        hit = self._cache.get(pair)
        if hit is not None:
            return hit
        s, q = pair
        if s is None:
            data = {TRAP_ACTION: (((TRAP_PAIR,), np.array([1.0]), 1.0))}
            entry = ((TRAP_ACTION,), data)
            self._cache[pair] = entry
            return entry
        choices = sorted(step(self.a, q, self._letters[s]))
        if not choices:
            data = {TRAP_ACTION: (((TRAP_PAIR,), np.array([1.0]), 1.0))}
            entry = ((TRAP_ACTION,), data)
            self._cache[pair] = entry
            return entry
        actions: List[ActionPair] = []
        data = {}
        for act in self.m.enabled(s):
            succ, rates = self.m.successors(s, act)
            cum = np.cumsum(rates)
            lam = float(cum[-1])
            for q2 in choices:
                pairs = tuple((int(t), q2) for t in succ)
                actions.append((act, q2))
                data[(act, q2)] = (pairs, cum, lam)
        entry = (tuple(actions), data)
        self._cache[pair] = entry
        return entry

    def actions(self, pair: StatePair) -> Tuple[ActionPair, ...]:
        return self._row(pair)[0]

    def sample(self, pair: StatePair, action: ActionPair,
               rng: RngHandle) -> Tuple[StatePair, float]:
        pairs, cum, lam = self._row(pair)[1][action]
        dwell = -math.log1p(-rng.uniform()) / lam
        u = rng.uniform() * lam
        idx = int(np.searchsorted(cum, u, side="right"))
        if idx >= len(pairs):
            idx = len(pairs) - 1
        return pairs[idx], dwell

    def exit_rate(self, pair: StatePair, action: ActionPair) -> float:
        return self._row(pair)[1][action][2]


def select_action(q: QTable, s: StatePair, actions: Tuple[ActionPair, ...],
                  epsilon: float, rng: RngHandle) -> ActionPair:
    """Epsilon-greedy over the given action order."""
    if epsilon > 0.0 and rng.uniform() < epsilon:
        return actions[rng.integers(len(actions))]
    return q.best(s, actions)[0]


def q_update(q: QTable, s: StatePair, a: ActionPair, r: float, tau: float,
             s_next: Optional[StatePair],
             next_actions: Tuple[ActionPair, ...],
             hp: Hyperparams) -> float:
    """Q(s,a) <- (1-beta) Q(s,a) + beta (r + e^{-alpha tau} max_a' Q(s',a')).

    ``next_actions`` empty (or ``s_next`` None) means the transition was
    terminal and nothing is bootstrapped.  Requires ``hp.alpha`` to be set.
    """
    if tau < 0:
        raise ValueError(f"negative dwell time {tau}")
    if hp.alpha is None:
        raise ValueError("hp.alpha must be resolved before updating")
    cont = 0.0
    if s_next is not None and next_actions:
        cont = math.exp(-hp.alpha * tau) * q.value(s_next, next_actions)
    if hp.decay_beta:
        beta = 1.0 / (1 + q.visits.get((s, a), 0))
    else:
        beta = hp.beta
    q.update(s, a, beta, r + cont)
    return q.get(s, a)


def extract_schedule(q: QTable, env: OnTheFlyProductEnv) -> Schedule:
    """Greedy schedule on the visited fragment of the product."""
    out: Schedule = {}
    for s in q.visited_states():
        if s == TRAP_PAIR:
            continue
        actions = env.actions(s)
        out[s] = q.best(s, actions)[0]
    return out


@dataclass
class LearnResult:
    qtable: QTable
    schedule: Schedule
    estimate: float            # greedy value at the initial product state
    episodes_run: int
    steps_run: int
    converged: bool
    alpha: float
    history: List[float] = field(default_factory=list)  # estimate per check


_CHECK_EVERY = 500
_STABLE_CHECKS = 4


def _train(env: OnTheFlyProductEnv, hp: Hyperparams, seed: int,
           satisfaction: bool) -> LearnResult:
    rngs = make_rngs(seed)
    traj, coin, explore = rngs["trajectory"], rngs["coin"], rngs["exploration"]
    alpha = hp.alpha_for(env.m.max_exit_rate, satisfaction=satisfaction)
    hp = replace(hp, alpha=alpha)
    q = QTable()
    init = env.reset()
    fail_pay = 1.0 - hp.zeta
    steps = 0
    history: List[float] = []
    stable = 0
    converged = False
    episodes = 0
    for episodes in range(1, hp.ep_n + 1):
        s = init
        for _ in range(hp.ep_len):
            actions = env.actions(s)
            a = select_action(q, s, actions, hp.epsilon, explore)
            s2, dwell = env.sample(s, a, traj)
            steps += 1
            if satisfaction:
                r = 0
                if env.is_accepting(s) and coin.uniform() < fail_pay:
                    r = 1
                if r == 1:
                    # payout absorbs the run; nothing left to bootstrap
                    q_update(q, s, a, 1.0, dwell, None, (), hp)
                    break
                q_update(q, s, a, 0.0, dwell, s2, env.actions(s2), hp)
            else:
                r = dwell if env.is_accepting(s) else 0.0
                q_update(q, s, a, r, dwell, s2, env.actions(s2), hp)
            s = s2
        if episodes % _CHECK_EVERY == 0:
            est = q.value(init, env.actions(init))
            if history and abs(est - history[-1]) < hp.tol:
                stable += 1
                if stable >= _STABLE_CHECKS:
                    history.append(est)
                    converged = True
                    break
            else:
                stable = 0
            history.append(est)

    estimate = q.value(init, env.actions(init))
    if not satisfaction:
        # undo the discounting: for small alpha, alpha * v approximates the
        # long-run time average of the reward rate
        estimate *= alpha
    return LearnResult(qtable=q, schedule=extract_schedule(q, env),
                       estimate=estimate, episodes_run=episodes,
                       steps_run=steps, converged=converged, alpha=alpha,
                       history=history)


def learn_sat(m: Ctmdp, a: BuchiAutomaton, hp: Optional[Hyperparams] = None,
              seed: int = 0) -> LearnResult:
    """Learn a schedule maximizing the probability of Buchi acceptance."""
    hp = hp or Hyperparams()
    return _train(OnTheFlyProductEnv(m, a), hp, seed, satisfaction=True)


def learn_exp(m: Ctmdp, a: BuchiAutomaton, hp: Optional[Hyperparams] = None,
              seed: int = 0) -> LearnResult:
    """Learn a schedule maximizing the long-run fraction of accepting time."""
    hp = hp or Hyperparams()
    return _train(OnTheFlyProductEnv(m, a), hp, seed, satisfaction=False)
