"""
Budgets and the LSVI-UCB deployment stage shared by every pipeline.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.constants import DEFAULTS, LOGGER_NAME
from src.errors import InvalidParameter
from src.features.decoders import FeatureMap
from src.lsvi.bonus import beta_deployment
from src.lsvi.lsvi_ucb import lsvi_ucb
from src.lsvi.trace import RegretTrace, SolveCriterion
from src.mdp.access import AccessCounter, EnvHandle
from src.mdp.block_mdp import BlockMdp
from src.mdp.dynamic_programming import dp_optimal_value, dp_policy_value

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class TransferBudgets:
    """Episode and sample budgets of a pipeline.

    Attributes:
        n_rf: Reward-free model-learning episodes per task.
        n_lsvi: In-model LSVI-UCB episodes per task.
        n: Tuples per cross dataset ``D_{ij;h}``.
        t_deploy: Deployment episodes in the target.
    """
    n_rf: int
    n_lsvi: int
    n: int
    t_deploy: int

    def __post_init__(self) -> None:
        for name in ("n_rf", "n_lsvi", "n", "t_deploy"):
            if getattr(self, name) < 1:
                raise InvalidParameter(f"budget {name} must be positive, got {getattr(self, name)}")
        if self.n_rf < 2:
            raise InvalidParameter("budget n_rf must be at least 2")


@dataclass(frozen=True)
class DeploymentOptions:
    """How the deployment bonus is chosen and when a run may stop.

    Attributes:
        beta: Fixed bonus scale; the theoretical scale is used when ``None``.
        beta_scale: Multiplier applied to the bonus scale.
        stop_when_solved: End deployment once the solve criterion holds.
        solve_interval: Episodes between solve checks.
        solve_runs: Evaluation episodes per check.
        solve_consecutive: Consecutive successful checks required.
    """
    beta: float | None = None
    beta_scale: float = 1.0
    stop_when_solved: bool = True
    solve_interval: int = DEFAULTS.SOLVE_INTERVAL
    solve_runs: int = DEFAULTS.SOLVE_RUNS
    solve_consecutive: int = DEFAULTS.SOLVE_CONSECUTIVE


@dataclass(eq=False)
class DeploymentResult:
    trace: RegretTrace
    access: AccessCounter
    beta: float


def deployment_beta(phi: FeatureMap, t_deploy: int, delta: float, alpha_bar: float, options: DeploymentOptions) -> float:
    if options.beta is not None:
        return options.beta_scale * options.beta
    return options.beta_scale * beta_deployment(phi.max_dimension, phi.horizon, t_deploy, delta, alpha_bar)


def deploy(
    target: BlockMdp,
    phi: FeatureMap,
    t_deploy: int,
    delta: float,
    alpha_bar: float,
    rng: np.random.Generator,
    eval_rng: np.random.Generator,
    options: DeploymentOptions | None = None,
    offset: int = 0,
) -> DeploymentResult:
    """Run LSVI-UCB with ``phi`` and the known target reward.

    Args:
        target: Target task.
        phi: Features to deploy with.
        t_deploy: Deployment episode budget.
        delta: Failure probability in the bonus scale.
        alpha_bar: Span-coefficient magnitude in the bonus scale.
        rng: Deployment stream.
        eval_rng: Stream of the solve checkpoints.
        options: Bonus and stopping options.
        offset: Target episodes consumed before deployment, added to the
            episodes-to-solve count.
    """
    options = options or DeploymentOptions()
    handle = EnvHandle(target, "target")
    optimum, _ = dp_optimal_value(target)
    beta = deployment_beta(phi, t_deploy, delta, alpha_bar, options)
    solve = SolveCriterion(
        env=target,
        optimum=optimum,
        rng=eval_rng,
        interval=options.solve_interval,
        runs=options.solve_runs,
        consecutive=options.solve_consecutive,
        offset=offset,
    )
    _, trace = lsvi_ucb(
        handle,
        phi,
        target.group_rewards(),
        t_deploy,
        beta,
        rng=rng,
        evaluator=lambda policy: dp_policy_value(target, policy),
        solve=solve,
        stop_when_solved=options.stop_when_solved,
    )
    logger.info(
        f"Deployment on {target.name}: beta={beta:.3g}, {trace.num_episodes} episodes, "
        f"{'solved at ' + str(int(trace.episodes_to_solve)) if trace.solved else 'unsolved'}"
    )
    return DeploymentResult(trace=trace, access=handle.counter, beta=beta)
