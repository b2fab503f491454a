"""
Least-squares value iteration with elliptical bonuses.
"""
from src.lsvi.bonus import beta_deployment, beta_eps, elliptical_bonus, elliptical_bonuses, rank_one_update
from src.lsvi.lsvi_ucb import LsviState, lsvi_ucb
from src.lsvi.trace import RegretTrace, SolveCriterion

__all__ = [
    "LsviState",
    "RegretTrace",
    "SolveCriterion",
    "beta_deployment",
    "beta_eps",
    "elliptical_bonus",
    "elliptical_bonuses",
    "lsvi_ucb",
    "rank_one_update",
]
