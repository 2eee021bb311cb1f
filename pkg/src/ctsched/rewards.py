"""Reward signals for the two learning objectives.

Satisfaction: a transition leaving an accepting state pays 1 with probability
1 - zeta (a coin flip independent of the trajectory), 0 otherwise.  The payout
marks "the run got absorbed by the sink" in the augmented product without ever
building that product explicitly.

Expectation: the reward of a transition is the dwell time when the state being
left is accepting, 0 otherwise, so accumulated reward per unit time converges
to the fraction of time spent in accepting states.
"""
from __future__ import annotations

from dataclasses import dataclass

from .simulate import RngHandle


class RewardError(ValueError):
    pass


@dataclass
class SatRewardCfg:
    zeta: float
    coin: RngHandle

    def __post_init__(self):
        if not (0.0 < self.zeta < 1.0):
            raise RewardError(f"zeta must lie in (0,1), got {self.zeta}")


def sat_reward(cfg: SatRewardCfg, from_accepting: bool) -> int:
    """Coin flip with success probability 1 - zeta; no draw off accepting states."""
    if not from_accepting:
        return 0
    return 1 if cfg.coin.uniform() < 1.0 - cfg.zeta else 0


@dataclass
class ExpRewardCfg:
    pass


def exp_reward(cfg: ExpRewardCfg, state_accepting: bool, dwell: float) -> float:
    if dwell < 0:
        raise RewardError(f"negative dwell time {dwell}")
    return dwell if state_accepting else 0.0
