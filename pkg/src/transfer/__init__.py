"""
Representation transfer pipelines, baselines and the lower-bound verifier.
"""
from src.transfer.deployment import DeploymentOptions, DeploymentResult, TransferBudgets, deploy
from src.transfer.pipelines import (
    ExploreOptions,
    explore_sources,
    oracle_baseline,
    oracle_policies,
    rep_transfer_generative,
    rep_transfer_online,
    run_pipeline,
    scratch_baseline,
    source_handles,
    source_only_baseline,
)
from src.transfer.report import TransferReport
from src.transfer.sampling import cross_sample, on_policy_sample
from src.transfer.verifier import LowerBoundDemo, best_fingerprint_value, lower_bound_demo, verify_lower_bound

__all__ = [
    "DeploymentOptions",
    "DeploymentResult",
    "ExploreOptions",
    "LowerBoundDemo",
    "TransferBudgets",
    "TransferReport",
    "best_fingerprint_value",
    "cross_sample",
    "deploy",
    "explore_sources",
    "lower_bound_demo",
    "on_policy_sample",
    "oracle_baseline",
    "oracle_policies",
    "rep_transfer_generative",
    "rep_transfer_online",
    "run_pipeline",
    "scratch_baseline",
    "source_handles",
    "source_only_baseline",
    "verify_lower_bound",
]
