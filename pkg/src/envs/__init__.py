"""
Environment families: comblocks, transfer suites and the lower-bound construction.
"""
from src.envs.comblock import build_comblock, optimal_actions_of
from src.envs.lower_bound import LowerBoundFamily, build_lower_bound_family
from src.envs.suites import (
    TransferSuite,
    build_comblock_mixture_suite,
    build_mixture_target,
    build_partitioned_suite,
    build_shared_emission_suite,
)

__all__ = [
    "LowerBoundFamily",
    "TransferSuite",
    "build_comblock",
    "build_comblock_mixture_suite",
    "build_lower_bound_family",
    "build_mixture_target",
    "build_partitioned_suite",
    "build_shared_emission_suite",
    "optimal_actions_of",
]
