"""
Reward-free model learning and exploratory policy search.
"""
from src.explore.eps import ExploratoryPolicy, eps, measure_coverage, oracle_exploratory_policy
from src.explore.planning import ModelPlan, plan_in_model
from src.explore.rep_ucb import RepUcbRun, bonus_scales, bonus_tables, reward_free_rep_ucb

__all__ = [
    "ExploratoryPolicy",
    "ModelPlan",
    "RepUcbRun",
    "bonus_scales",
    "bonus_tables",
    "eps",
    "measure_coverage",
    "oracle_exploratory_policy",
    "plan_in_model",
    "reward_free_rep_ucb",
]
