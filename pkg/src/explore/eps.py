"""
Exploratory policy search: reward-free model learning followed by
zero-reward LSVI-UCB inside the learned model.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.constants import DEFAULTS, LOGGER_NAME
from src.errors import RepTransferError
from src.explore.rep_ucb import RepUcbRun, reward_free_rep_ucb
from src.features.decoders import HypothesisClass
from src.features.models import LinearMdpModel
from src.lsvi.bonus import beta_eps
from src.lsvi.lsvi_ucb import lsvi_ucb
from src.mdp.access import EnvHandle
from src.mdp.block_mdp import BlockMdp
from src.mdp.dynamic_programming import coverage_lambda_min, dp_optimal_value
from src.mdp.policies import GreedyPolicy, MixturePolicy, Policy, RollInPolicy, roll_in_uniform

logger = logging.getLogger(LOGGER_NAME)


@dataclass(eq=False)
class ExploratoryPolicy:
    """A uniform mixture meant to cover every step of one task.

    Attributes:
        mixture: The mixture policy.
        coverage: ``lambda_min`` of the true feature second moment per step under
            the roll-in-plus-uniform variant; diagnostic only.
        model: Learned model the mixture was trained in, if any.
        run: Reward-free run record, if any.
    """
    mixture: MixturePolicy
    coverage: np.ndarray
    model: LinearMdpModel | None = None
    run: RepUcbRun | None = None

    def roll_in(self, h: int) -> Policy:
        """``rho_h^{+1}``: follow the mixture before ``h`` and act uniformly from ``h`` on."""
        return roll_in_uniform(self.mixture, h)

    def to_document(self, include_q_tables: bool = False) -> dict[str, Any]:
        document: dict[str, Any] = {
            "components": len(self.mixture),
            "coverage": self.coverage.tolist(),
            "rep_ucb": self.run.to_document() if self.run is not None else None,
        }
        if include_q_tables:
            document["q_tables"] = [
                [q.tolist() for q in policy.q_tables]
                for policy in self.mixture.policies
                if isinstance(policy, GreedyPolicy)
            ]
        return document


def measure_coverage(env: BlockMdp, mixture: Policy) -> np.ndarray:
    """True-feature coverage of ``mixture``'s roll-in-plus-uniform variant over reachable latents at every step."""
    return np.array([
        coverage_lambda_min(env, roll_in_uniform(mixture, h), h, reachable_only=True)
        for h in range(env.horizon)
    ])


def eps(
    handle: EnvHandle,
    hclass: HypothesisClass,
    num_lsvi_episodes: int,
    num_rf_episodes: int,
    delta: float,
    rng: np.random.Generator,
    beta_scale: float = 1.0,
    lambda_scale: float = 1.0,
    alpha_scale: float = 1.0,
    smoothing: float = DEFAULTS.SMOOTHING,
) -> ExploratoryPolicy:
    """Find an exploratory policy for the task behind ``handle``.

    Only the reward-free phase touches the environment; the LSVI-UCB phase
    runs in the learned model.

    Raises:
        RepTransferError: If the in-model phase consumed environment samples.
    """
    model, run = reward_free_rep_ucb(
        handle, hclass, num_rf_episodes, rng, delta,
        lambda_scale=lambda_scale, alpha_scale=alpha_scale, smoothing=smoothing,
    )
    before = handle.counter.snapshot()
    H = model.horizon
    beta = beta_scale * beta_eps(model.phi.max_dimension, H, num_lsvi_episodes, delta)
    zero_reward = [np.zeros((model.layout.num_groups(h), model.num_actions)) for h in range(H)]
    mixture, _ = lsvi_ucb(model, model.phi, zero_reward, num_lsvi_episodes, beta, uniform_actions=True, rng=rng)
    if handle.counter != before:
        raise RepTransferError(f"in-model exploration touched {handle.name}")

    coverage = measure_coverage(handle.env, mixture)
    logger.info(
        f"EPS on {handle.name}: {num_rf_episodes} model-learning episodes, "
        f"min coverage {coverage.min():.4g} over steps"
    )
    return ExploratoryPolicy(mixture=mixture, coverage=coverage, model=model, run=run)


def oracle_exploratory_policy(env: BlockMdp) -> ExploratoryPolicy:
    """Mixture of the optimal policy switched to uniform play at every possible step."""
    _, optimal = dp_optimal_value(env)
    mixture = MixturePolicy([RollInPolicy(optimal, switch) for switch in range(env.horizon)])
    return ExploratoryPolicy(mixture=mixture, coverage=measure_coverage(env, mixture))
