"""Exact analysis of CTMDPs: discounted values, long-run averages, and the
two product objectives (probability of Buchi acceptance, long-run fraction of
time in accepting states).

Everything reduces to linear algebra on the uniformized embedded chain:

* discounted values solve v = rho + Gamma P v, where Gamma(s) =
  lam(s, a) / (lam(s, a) + alpha) is the expected dwell discount;
* long-run averages come from bottom strongly connected components of the
  induced chain, their stationary distributions, and absorption
  probabilities;
* average optimization is multichain policy iteration (gain stage, then bias
  stage) on the uniformized chain;
* acceptance probabilities combine maximal-end-component analysis with exact
  maximal reachability.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .model import Ctmdp, CtmdpError, embed, exit_rate, mec_decompose
from .product import ProductCtmdp, Schedule, schedule_from_ids, schedule_to_ids

_TIE_TOL = 1e-9


class ConvergenceError(CtmdpError):
    pass


# ---------------------------------------------------------------------------
# Reward specifications

@dataclass(frozen=True)
class RewardSpec:
    """State reward rates (paid per unit time) and transition rewards (paid
    once per transition, keyed by (state, action))."""

    state_rate: np.ndarray
    action_reward: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def act(self, s: int, a: int) -> float:
        return self.action_reward.get((s, a), 0.0)


def accepting_rate_spec(num_states: int, accepting: FrozenSet[int]) -> RewardSpec:
    """Rate 1 while in an accepting state, nothing else."""
    rate = np.zeros(num_states)
    for s in accepting:
        rate[s] = 1.0
    return RewardSpec(state_rate=rate)


def alpha_from_gamma(gamma: float, uniform_rate: float) -> float:
    """Continuous discount rate matching per-step discount gamma at rate C."""
    if not (0.0 < gamma < 1.0):
        raise CtmdpError(f"gamma must lie in (0,1), got {gamma}")
    return uniform_rate * (1.0 - gamma) / gamma


def uniformized_reward_spec(m: Ctmdp, spec: RewardSpec, alpha: float,
                            cap: float) -> RewardSpec:
    """Transition rewards adjusted so discounted values are preserved when
    the model is uniformized to exit rate ``cap``.

    A transition of (s, a) happens once per dwell in the original model but
    on average (cap / lam) times as often after uniformization (self-loops
    included), and the dwell discount changes accordingly; scaling each
    transition reward by (alpha + lam) / (alpha + cap) compensates exactly.
    """
    adjusted = {}
    for (s, a) in m.trans:
        lam = exit_rate(m, s, a)
        r = spec.act(s, a)
        if r != 0.0:
            adjusted[(s, a)] = r * (alpha + lam) / (alpha + cap)
    return RewardSpec(state_rate=spec.state_rate.copy(), action_reward=adjusted)


def step_reward_spec(m: Ctmdp, spec: RewardSpec, cap: float) -> Dict[Tuple[int, int], float]:
    """Per-step rewards on the cap-uniformized chain whose per-step average
    times cap equals the original time average."""
    out = {}
    for (s, a) in m.trans:
        lam = exit_rate(m, s, a)
        out[(s, a)] = (float(spec.state_rate[s]) + lam * spec.act(s, a)) / cap
    return out


# ---------------------------------------------------------------------------
# Induced-chain plumbing

def _check_schedule(m: Ctmdp, sigma: np.ndarray):
    if len(sigma) != m.num_states:
        raise CtmdpError("schedule length does not match state count")
    for s in range(m.num_states):
        if (s, int(sigma[s])) not in m.trans:
            raise CtmdpError(
                f"schedule picks disabled action {int(sigma[s])} in state {s}")


def _induced_embedded(m: Ctmdp, sigma: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(P, lam): embedded transition matrix and exit rates of the chain."""
    n = m.num_states
    P = np.zeros((n, n))
    lam = np.zeros(n)
    for s in range(n):
        succ, rates = m.successors(s, int(sigma[s]))
        lam[s] = rates.sum()
        P[s, succ] = rates / lam[s]
    return P, lam


def _uniformized(P: np.ndarray, lam: np.ndarray, cap: float) -> np.ndarray:
    out = (lam / cap)[:, None] * P
    out[np.diag_indices_from(out)] += 1.0 - lam / cap
    return out


def _bsccs(P: np.ndarray) -> Tuple[List[List[int]], np.ndarray]:
    """Bottom SCCs of a stochastic matrix plus the SCC id per state."""
    graph = csr_matrix(P > 0)
    ncomp, comp = connected_components(graph, directed=True, connection="strong")
    leaves = np.ones(ncomp, dtype=bool)
    rows, cols = np.nonzero(P > 0)
    for i, j in zip(rows, cols):
        if comp[i] != comp[j]:
            leaves[comp[i]] = False
    out = [sorted(np.flatnonzero(comp == c)) for c in range(ncomp) if leaves[c]]
    return out, comp


def _stationary(P: np.ndarray) -> np.ndarray:
    """Stationary distribution of an irreducible stochastic matrix."""
    k = P.shape[0]
    A = np.vstack([P.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _absorption(P: np.ndarray, value_on_recurrent: np.ndarray,
                recurrent: Set[int]) -> np.ndarray:
    """Extend a value fixed on recurrent states to all states by the
    harmonic equations v = P v on transient states."""
    n = P.shape[0]
    out = value_on_recurrent.astype(float).copy()
    transient = [s for s in range(n) if s not in recurrent]
    if not transient:
        return out
    t = np.array(transient)
    rec = np.array(sorted(recurrent), dtype=np.int64)
    A = np.eye(len(t)) - P[np.ix_(t, t)]
    b = P[np.ix_(t, rec)] @ out[rec] if len(rec) else np.zeros(len(t))
    out[t] = np.linalg.solve(A, b)
    return out


# ---------------------------------------------------------------------------
# Discounted values

def discounted_value(m: Ctmdp, spec: RewardSpec, sigma: np.ndarray,
                     alpha: float) -> np.ndarray:
    """v(s) = E[sum over transitions of e^{-alpha t} rewards] under sigma."""
    if alpha <= 0:
        raise CtmdpError(f"alpha must be positive, got {alpha}")
    _check_schedule(m, sigma)
    n = m.num_states
    P, lam = _induced_embedded(m, sigma)
    gamma = lam / (lam + alpha)
    rho = np.array([spec.act(s, int(sigma[s])) for s in range(n)])
    rho += spec.state_rate / (alpha + lam)
    return np.linalg.solve(np.eye(n) - gamma[:, None] * P, rho)


def discounted_optimal(m: Ctmdp, spec: RewardSpec, alpha: float,
                       max_iter: int = 1000) -> Tuple[np.ndarray, np.ndarray]:
    """Policy iteration for the discounted objective; exact at fixed point."""
    n = m.num_states
    sigma = np.array([m.enabled(s)[0] for s in range(n)], dtype=np.int64)
    for _ in range(max_iter):
        v = discounted_value(m, spec, sigma, alpha)
        new = sigma.copy()
        for s in range(n):
            def qval(a):
                succ, rates = m.successors(s, a)
                lam = rates.sum()
                return (spec.act(s, a) + spec.state_rate[s] / (alpha + lam)
                        + lam / (lam + alpha) * float((rates / lam) @ v[succ]))
            # keep the incumbent on ties to avoid cycling
            best_a = int(sigma[s])
            best_q = qval(best_a)
            for a in m.enabled(s):
                if a == best_a:
                    continue
                q = qval(a)
                if q > best_q + _TIE_TOL * max(1.0, abs(best_q)):
                    best_a, best_q = a, q
            new[s] = best_a
        if np.array_equal(new, sigma):
            return v, sigma
        sigma = new
    raise ConvergenceError("discounted policy iteration did not converge")


# ---------------------------------------------------------------------------
# Long-run averages

def average_value(m: Ctmdp, spec: RewardSpec, sigma: np.ndarray) -> np.ndarray:
    """Per-state long-run reward per unit time under the schedule sigma."""
    _check_schedule(m, sigma)
    n = m.num_states
    P, lam = _induced_embedded(m, sigma)
    cap = float(lam.max())
    PC = _uniformized(P, lam, cap)
    bsccs, _ = _bsccs(PC)
    gains = np.zeros(n)
    recurrent: Set[int] = set()
    for members in bsccs:
        idx = np.array(members)
        pi = _stationary(PC[np.ix_(idx, idx)])
        rate = np.array([spec.state_rate[s] + lam[s] * spec.act(s, int(sigma[s]))
                         for s in members])
        g = float(pi @ rate)
        gains[idx] = g
        recurrent |= set(members)
    return _absorption(PC, gains, recurrent)


def _policy_gain_bias(P: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(g, h) with g = P g and g + h = r + P h for a stochastic matrix P."""
    n = P.shape[0]
    bsccs, _ = _bsccs(P)
    g = np.zeros(n)
    h = np.zeros(n)
    recurrent: Set[int] = set()
    for members in bsccs:
        idx = np.array(members)
        sub = P[np.ix_(idx, idx)]
        pi = _stationary(sub)
        gain = float(pi @ r[idx])
        g[idx] = gain
        k = len(idx)
        A = np.vstack([np.eye(k) - sub, np.ones((1, k))])
        b = np.concatenate([r[idx] - gain, [0.0]])
        h[idx], *_ = np.linalg.lstsq(A, b, rcond=None)
        recurrent |= set(members)
    g = _absorption(P, g, recurrent)
    transient = [s for s in range(n) if s not in recurrent]
    if transient:
        t = np.array(transient)
        rec = np.array(sorted(recurrent), dtype=np.int64)
        A = np.eye(len(t)) - P[np.ix_(t, t)]
        b = r[t] - g[t]
        if len(rec):
            b = b + P[np.ix_(t, rec)] @ h[rec]
        h[t] = np.linalg.solve(A, b)
    return g, h


def average_optimal(m: Ctmdp, spec: RewardSpec,
                    max_iter: int = 500) -> Tuple[np.ndarray, np.ndarray]:
    """Multichain policy iteration; returns per-state optimal gains and a
    gain-optimal, bias-improved schedule."""
    n = m.num_states
    cap = m.max_exit_rate
    r_step = step_reward_spec(m, spec, cap)

    rows: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]] = {}
    for (s, a), (succ, rates) in m.trans.items():
        lam = rates.sum()
        p = np.zeros(n)
        p[succ] = rates / cap
        p[s] += 1.0 - lam / cap
        rows[(s, a)] = (p, r_step[(s, a)])

    sigma = np.array([m.enabled(s)[0] for s in range(n)], dtype=np.int64)
    for _ in range(max_iter):
        P = np.vstack([rows[(s, int(sigma[s]))][0] for s in range(n)])
        r = np.array([rows[(s, int(sigma[s]))][1] for s in range(n)])
        g, h = _policy_gain_bias(P, r)
        scale = max(1.0, float(np.abs(g).max()), float(np.abs(h).max()))
        new = sigma.copy()
        changed = False
        for s in range(n):
            # gain stage: strictly increase P g where possible
            best_a = int(sigma[s])
            best_gain = float(rows[(s, best_a)][0] @ g)
            for a in m.enabled(s):
                cand = float(rows[(s, a)][0] @ g)
                if cand > best_gain + _TIE_TOL * scale:
                    best_a, best_gain = a, cand
            if best_a != sigma[s]:
                new[s] = best_a
                changed = True
                continue
            # bias stage among gain-optimal actions
            best_val = rows[(s, best_a)][1] - g[s] + float(rows[(s, best_a)][0] @ h)
            for a in m.enabled(s):
                p, rw = rows[(s, a)]
                if float(p @ g) < best_gain - _TIE_TOL * scale:
                    continue
                val = rw - g[s] + float(p @ h)
                if val > best_val + _TIE_TOL * scale:
                    best_a, best_val = a, val
            if best_a != sigma[s]:
                new[s] = best_a
                changed = True
        if not changed:
            return g * cap, sigma
        sigma = new
    raise ConvergenceError("average-reward policy iteration did not converge")


# ---------------------------------------------------------------------------
# Product objectives

@dataclass
class CheckResult:
    values: np.ndarray
    schedule: Optional[Schedule]
    initial: int
    iterations: int = 0
    residual: float = 0.0

    @property
    def value(self) -> float:
        return float(self.values[self.initial])


def _reach_probability(P: np.ndarray, target: Set[int]) -> np.ndarray:
    """Probability of ever hitting ``target`` in the chain P (exact solve)."""
    n = P.shape[0]
    # states that cannot reach the target at all have probability 0
    can = set(target)
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s in can:
                continue
            if np.any(P[s][sorted(can)] > 0):
                can.add(s)
                changed = True
    v = np.zeros(n)
    for s in target:
        v[s] = 1.0
    unknown = [s for s in range(n) if s in can and s not in target]
    if unknown:
        t = np.array(unknown)
        tgt = np.array(sorted(target), dtype=np.int64)
        A = np.eye(len(t)) - P[np.ix_(t, t)]
        b = P[np.ix_(t, tgt)].sum(axis=1)
        v[t] = np.linalg.solve(A, b)
    return np.clip(v, 0.0, 1.0)


def psem_of(p: ProductCtmdp, schedule: Schedule) -> CheckResult:
    """Probability of visiting accepting states infinitely often under a
    fixed schedule."""
    sigma = schedule_to_ids(p, schedule)
    _check_schedule(p.ctmdp, sigma)
    P, _ = _induced_embedded(p.ctmdp, sigma)
    bsccs, _ = _bsccs(P)
    good: Set[int] = set()
    for members in bsccs:
        if set(members) & p.accepting:
            good |= set(members)
    values = _reach_probability(P, good) if good else np.zeros(p.num_states)
    return CheckResult(values=values, schedule=schedule, initial=p.ctmdp.initial)


def _max_reach(rows: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]],
               n: int, enabled: Sequence[Tuple[int, ...]],
               target: Set[int], tol: float = 1e-12,
               max_iter: int = 200000) -> Tuple[np.ndarray, int, float]:
    """Maximal reachability probabilities by value iteration to fixpoint."""
    v = np.zeros(n)
    for s in target:
        v[s] = 1.0
    free = [s for s in range(n) if s not in target]
    delta = 0.0
    for it in range(1, max_iter + 1):
        delta = 0.0
        for s in free:
            best = 0.0
            for a in enabled[s]:
                succ, pr = rows[(s, a)]
                best = max(best, float(pr @ v[succ]))
            delta = max(delta, abs(best - v[s]))
            v[s] = best
        if delta < tol:
            return v, it, delta
    raise ConvergenceError("reachability value iteration did not converge")


def psem_optimal(p: ProductCtmdp, tol: float = 0.01) -> CheckResult:
    """Maximal probability of Buchi acceptance, with a witnessing schedule.

    Winning region: states of maximal end-components that contain an
    accepting state.  Outside it, a maximal-reachability schedule that makes
    progress toward the region; inside, an attractor toward the accepting
    states using only actions that keep the run in its component.
    """
    m = p.ctmdp
    n = m.num_states
    e = embed(m)
    mecs = mec_decompose(e, set(p.accepting))
    target: Set[int] = set()
    retained: Dict[int, Tuple[int, ...]] = {}
    for mec in mecs.components:
        if mec.accepting:
            target |= set(mec.states)
            retained.update(mec.actions)

    enabled = [m.enabled(s) for s in range(n)]
    rows = {key: val for key, val in e.probs.items()}
    # the final values come from an exact solve; VI runs well below tol so the
    # extracted schedule is reliable
    v, iters, resid = _max_reach(rows, n, enabled, target,
                                 tol=min(tol, 1e-12))

    sigma = np.array([enabled[s][0] for s in range(n)], dtype=np.int64)

    # outside the winning region: among value-preserving actions, always pick
    # one whose support touches states already scheduled, so every step has
    # positive probability of progress
    settled = set(target) | {s for s in range(n) if v[s] <= 0.0}
    pending = [s for s in range(n) if s not in settled]
    while pending:
        progressed = False
        for s in list(pending):
            for a in enabled[s]:
                succ, pr = rows[(s, a)]
                if float(pr @ v[succ]) < v[s] - 1e-9:
                    continue
                if any(int(t) in settled for t in succ):
                    sigma[s] = a
                    settled.add(s)
                    pending.remove(s)
                    progressed = True
                    break
        if not progressed:
            # numerically flat plateau: fall back to greedy choices
            for s in pending:
                best_a, best = enabled[s][0], -1.0
                for a in enabled[s]:
                    succ, pr = rows[(s, a)]
                    cand = float(pr @ v[succ])
                    if cand > best:
                        best_a, best = a, cand
                sigma[s] = best_a
            break

    # inside each winning component: attractor toward its accepting states
    for mec in mecs.components:
        if not mec.accepting:
            continue
        acc = set(mec.states) & set(p.accepting)
        done = set(acc)
        for s in acc:
            sigma[s] = mec.actions[s][0]
        frontier = True
        while frontier:
            frontier = False
            for s in mec.states:
                if s in done:
                    continue
                for a in mec.actions[s]:
                    succ, _ = rows[(s, a)]
                    if any(int(t) in done for t in succ):
                        sigma[s] = a
                        done.add(s)
                        frontier = True
                        break

    schedule = schedule_from_ids(p, sigma)
    exact = psem_of(p, schedule)
    if np.any(exact.values < v - 1e-7):
        # the extracted schedule must achieve the value-iteration bound
        raise ConvergenceError("schedule extraction lost reachability value")
    return CheckResult(values=exact.values, schedule=schedule,
                       initial=m.initial, iterations=iters, residual=resid)


def esem_of(p: ProductCtmdp, schedule: Schedule) -> CheckResult:
    """Long-run fraction of time in accepting states under a fixed schedule."""
    sigma = schedule_to_ids(p, schedule)
    spec = accepting_rate_spec(p.num_states, p.accepting)
    values = average_value(p.ctmdp, spec, sigma)
    return CheckResult(values=values, schedule=schedule, initial=p.ctmdp.initial)


def esem_optimal(p: ProductCtmdp, tol: float = 0.01) -> CheckResult:
    """Maximal long-run fraction of time in accepting states.

    The policy-iteration fixed point is exact, so ``tol`` only caps how much
    residual would be tolerated on a non-converging instance.
    """
    spec = accepting_rate_spec(p.num_states, p.accepting)
    gains, sigma = average_optimal(p.ctmdp, spec)
    return CheckResult(values=gains, schedule=schedule_from_ids(p, sigma),
                       initial=p.ctmdp.initial)


# ---------------------------------------------------------------------------
# Blackwell probing

@dataclass(frozen=True)
class BlackwellReport:
    gammas: Tuple[float, ...]
    schedules: Tuple[Tuple[int, ...], ...]   # discounted-optimal per gamma
    average_schedule: Tuple[int, ...]
    stable_from: Optional[int]               # index where schedules stabilize

    @property
    def stabilized(self) -> bool:
        return self.stable_from is not None


def blackwell_probe(m: Ctmdp, spec: RewardSpec,
                    gammas: Sequence[float]) -> BlackwellReport:
    """Track discounted-optimal schedules as gamma approaches 1 and compare
    with an average-optimal schedule; near 1 the discounted choice should
    stop changing and stay gain-optimal."""
    cap = m.max_exit_rate
    gs, sigma_avg = average_optimal(m, spec)
    schedules = []
    for gamma in gammas:
        alpha = alpha_from_gamma(gamma, cap)
        _, sigma = discounted_optimal(m, spec, alpha)
        schedules.append(tuple(int(x) for x in sigma))
    stable_from: Optional[int] = None
    for i in range(len(schedules)):
        if all(schedules[j] == schedules[i] for j in range(i, len(schedules))):
            stable_from = i
            break
    return BlackwellReport(gammas=tuple(gammas),
                           schedules=tuple(schedules),
                           average_schedule=tuple(int(x) for x in sigma_avg),
                           stable_from=stable_from)
