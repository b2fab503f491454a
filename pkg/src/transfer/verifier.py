"""
Exact check of the online-access lower bound construction.

A policy that only sees a state through its feature rows and reward row
acts identically on every state sharing that fingerprint. Enumerating all
fingerprint-to-action maps gives the best value such a policy can reach.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.constants import LOGGER_NAME
from src.envs.lower_bound import LowerBoundFamily
from src.features.decoders import FeatureMap, HypothesisClass
from src.features.mle import MultitaskFit, mle_multitask
from src.mdp.access import EnvHandle
from src.mdp.block_mdp import BlockMdp
from src.mdp.dynamic_programming import dp_optimal_value, dp_policy_value
from src.mdp.policies import DeterministicPolicy, UniformPolicy
from src.transfer.sampling import cross_sample, on_policy_sample

logger = logging.getLogger(LOGGER_NAME)


def fingerprints(env: BlockMdp, phi: FeatureMap) -> list[list[bytes]]:
    """Fingerprint of every codeword group: step, feature rows and reward row."""
    keys = []
    for h in range(env.horizon):
        features = phi.feature_tensor(h)
        rewards = env.group_reward(h)
        keys.append([
            bytes([h]) + features[g].tobytes() + rewards[g].tobytes()
            for g in range(env.layout.num_groups(h))
        ])
    return keys


def best_fingerprint_value(env: BlockMdp, phi: FeatureMap) -> float:
    """Best exact value over policies that are functions of the fingerprint."""
    keys = fingerprints(env, phi)
    distinct = sorted({key for step in keys for key in step})
    position = {key: i for i, key in enumerate(distinct)}
    best = -np.inf
    for assignment in itertools.product(range(env.num_actions), repeat=len(distinct)):
        actions = [np.array([assignment[position[key]] for key in step]) for step in keys]
        policy = DeterministicPolicy(env.layout, env.num_actions, actions)
        best = max(best, dp_policy_value(env, policy))
    return float(best)


def verify_lower_bound(family: LowerBoundFamily, phi_hat: FeatureMap) -> float:
    """``V*`` of the target minus the best value reachable through ``phi_hat``."""
    optimum, _ = dp_optimal_value(family.target)
    return optimum - best_fingerprint_value(family.target, phi_hat)


@dataclass(eq=False)
class LowerBoundDemo:
    """Gaps of both decoders and what each data regime selects."""
    gaps: dict[str, float]
    online_fit: MultitaskFit
    generative_fit: MultitaskFit
    details: dict[str, Any] = field(default_factory=dict)

    def to_document(self) -> dict[str, Any]:
        return {
            "gaps": self.gaps,
            "online": {"indices": self.online_fit.indices, "ties": [list(s.tied) for s in self.online_fit.ties]},
            "generative": {"indices": self.generative_fit.indices,
                           "ties": [list(s.tied) for s in self.generative_fit.ties]},
            "online_gap": self.details.get("online_gap"),
            "generative_gap": self.details.get("generative_gap"),
        }


def lower_bound_demo(family: LowerBoundFamily, n: int, rng: np.random.Generator) -> LowerBoundDemo:
    """Compare online and cross-sampled MLE on the lower-bound construction.

    Online data from each source cannot tell the two decoders apart, so the
    likelihoods tie; cross-sampled data separates them.
    """
    hclass = HypothesisClass.from_labelings(family.layout, family.target.num_actions, family.candidate_labels())
    correct = FeatureMap.from_labels(family.layout, family.target.num_actions, family.correct_labels)
    permuted = FeatureMap.from_labels(family.layout, family.target.num_actions, family.permuted_labels)
    gaps = {"correct": verify_lower_bound(family, correct), "permuted": verify_lower_bound(family, permuted)}

    handles = [EnvHandle(source, f"source-{k}") for k, source in enumerate(family.sources)]
    uniform = [UniformPolicy(family.layout, family.target.num_actions) for _ in handles]
    online = mle_multitask(
        [on_policy_sample(handle, uniform[k], k, 0, n, rng) for k, handle in enumerate(handles)],
        hclass, num_tasks=len(handles),
    )
    generative = mle_multitask(
        [cross_sample(handles, uniform, i, j, 0, n, rng) for i in range(len(handles)) for j in range(len(handles))],
        hclass, num_tasks=len(handles),
    )
    details = {
        "online_gap": verify_lower_bound(family, online.phi),
        "generative_gap": verify_lower_bound(family, generative.phi),
    }
    logger.info(
        f"Lower bound: gap {gaps['correct']:.3g} with the correct decoder, {gaps['permuted']:.3g} permuted; "
        f"online ties at steps {[s.h for s in online.ties]}"
    )
    return LowerBoundDemo(gaps=gaps, online_fit=online, generative_fit=generative, details=details)
