"""
Transfer pipelines and the baselines they are compared with.

Every pipeline pre-trains through counted source handles, revokes them, and
deploys LSVI-UCB in the target with the resulting features.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from src.constants import ALGORITHMS, DEFAULTS, LOGGER_NAME
from src.errors import InvalidParameter, SpanCoefficientsMissing, UnsupportedEmissionMode
from src.envs.suites import TransferSuite
from src.explore.eps import ExploratoryPolicy, eps, oracle_exploratory_policy
from src.explore.rep_ucb import reward_free_rep_ucb
from src.features.datasets import TransitionDataset
from src.features.decoders import FeatureMap, HypothesisClass
from src.features.diagnostics import decoder_confusion, span_model_tv, target_span_model
from src.features.mle import MultitaskFit, mle_multitask
from src.mdp.access import EnvHandle
from src.mdp.block_mdp import BlockMdp
from src.seeding import RunStreams
from src.transfer.deployment import DeploymentOptions, TransferBudgets, deploy
from src.transfer.report import TransferReport
from src.transfer.sampling import cross_sample, on_policy_sample

logger = logging.getLogger(LOGGER_NAME)


@dataclass(frozen=True)
class ExploreOptions:
    """Scales of the exploratory policy search."""
    beta_scale: float = 1.0
    lambda_scale: float = 1.0
    alpha_scale: float = 1.0
    smoothing: float = DEFAULTS.SMOOTHING


def source_handles(suite: TransferSuite) -> list[EnvHandle]:
    return [EnvHandle(source, f"source-{k}") for k, source in enumerate(suite.sources)]


def explore_sources(
    handles: list[EnvHandle],
    hclass: HypothesisClass,
    budgets: TransferBudgets,
    delta: float,
    rng: np.random.Generator,
    options: ExploreOptions | None = None,
) -> list[ExploratoryPolicy]:
    """Run exploratory policy search independently in every source."""
    options = options or ExploreOptions()
    return [
        eps(handle, hclass, budgets.n_lsvi, budgets.n_rf, delta, rng,
            beta_scale=options.beta_scale, lambda_scale=options.lambda_scale,
            alpha_scale=options.alpha_scale, smoothing=options.smoothing)
        for handle in handles
    ]


def oracle_policies(suite: TransferSuite) -> list[ExploratoryPolicy]:
    """Exploratory policies built from each source's optimal policy."""
    return [oracle_exploratory_policy(source) for source in suite.sources]


def _alpha_bar(suite: TransferSuite) -> float:
    try:
        return suite.alpha_bar
    except SpanCoefficientsMissing:
        return 1.0


def _span_tv(suite: TransferSuite, fit: MultitaskFit, rng: np.random.Generator) -> float | None:
    if suite.span_coefficients is None:
        return None
    try:
        mu_tilde = target_span_model([m.emission_embedding() for m in fit.models], suite.span_coefficients)
        return span_model_tv(fit.phi, mu_tilde, suite.target, rng)
    except UnsupportedEmissionMode:
        return None


def _confusion(phi: FeatureMap, target: BlockMdp) -> list[np.ndarray]:
    return [decoder_confusion(phi, target, h) for h in range(target.horizon)]


def _finish(
    algorithm: str,
    suite: TransferSuite,
    handles: list[EnvHandle],
    phi: FeatureMap,
    budgets: TransferBudgets,
    delta: float,
    streams: RunStreams,
    options: DeploymentOptions | None,
    fit: MultitaskFit | None = None,
    policies: list[ExploratoryPolicy] | None = None,
    offset: int = 0,
) -> TransferReport:
    """Revoke pre-training access, deploy and assemble the report."""
    for handle in handles:
        handle.revoke()
    result = deploy(suite.target, phi, budgets.t_deploy, delta, _alpha_bar(suite),
                    streams.policy, streams.evaluation, options, offset=offset)
    access = {handle.name: handle.counter for handle in handles}
    access["target"] = access["target"].merged(result.access) if "target" in access else result.access
    return TransferReport(
        algorithm=algorithm,
        suite=suite.name,
        phi=phi,
        trace=result.trace,
        episodes_to_solve=result.trace.episodes_to_solve,
        selections=list(fit.selections) if fit is not None else [],
        access=access,
        confusion=_confusion(phi, suite.target),
        span_tv=_span_tv(suite, fit, streams.evaluation) if fit is not None else None,
        coverage=[p.coverage.tolist() for p in policies] if policies else [],
        details={"beta": result.beta, "alpha_bar": _alpha_bar(suite)},
    )


def rep_transfer_generative(
    suite: TransferSuite,
    policies: list[ExploratoryPolicy],
    hclass: HypothesisClass,
    budgets: TransferBudgets,
    delta: float,
    streams: RunStreams,
    handles: list[EnvHandle] | None = None,
    options: DeploymentOptions | None = None,
) -> TransferReport:
    """Cross-sample every ``(i, j, h)``, fit shared features and deploy them.

    Args:
        suite: Sources and target.
        policies: Exploratory policy of every source.
        hclass: Decoder candidates.
        budgets: ``n`` tuples per cross dataset and the deployment budget.
        delta: Failure probability.
        streams: Random streams of the run.
        handles: Source handles already used for exploration; fresh ones otherwise.
        options: Deployment options.
    """
    handles = handles if handles is not None else source_handles(suite)
    K = suite.num_sources
    datasets: list[TransitionDataset] = [
        cross_sample(handles, policies, i, j, h, budgets.n, streams.learner)
        for i in range(K)
        for j in range(K)
        for h in range(suite.horizon - 1)
    ]
    fit = mle_multitask(datasets, hclass, num_tasks=K)
    return _finish(ALGORITHMS.GENERATIVE, suite, handles, fit.phi, budgets, delta, streams, options,
                   fit=fit, policies=policies)


def rep_transfer_online(
    suite: TransferSuite,
    hclass: HypothesisClass,
    budgets: TransferBudgets,
    delta: float,
    streams: RunStreams,
    policies: list[ExploratoryPolicy] | None = None,
    handles: list[EnvHandle] | None = None,
    options: DeploymentOptions | None = None,
    explore_options: ExploreOptions | None = None,
) -> TransferReport:
    """Online-only pre-training: per-source exploration and on-policy data, then shared MLE.

    Each source contributes ``n * K`` tuples per step, the same total as the
    ``K^2`` cross datasets of the generative pipeline.
    """
    handles = handles if handles is not None else source_handles(suite)
    if policies is None:
        policies = explore_sources(handles, hclass, budgets, delta, streams.learner, explore_options)
    K = suite.num_sources
    datasets = [
        on_policy_sample(handles[k], policies[k], k, h, budgets.n * K, streams.learner)
        for k in range(K)
        for h in range(suite.horizon - 1)
    ]
    fit = mle_multitask(datasets, hclass, num_tasks=K)
    return _finish(ALGORITHMS.ONLINE, suite, handles, fit.phi, budgets, delta, streams, options,
                   fit=fit, policies=policies)


def oracle_baseline(
    suite: TransferSuite,
    budgets: TransferBudgets,
    delta: float,
    streams: RunStreams,
    options: DeploymentOptions | None = None,
) -> TransferReport:
    """Deploy with the true decoder of the target."""
    target = suite.target
    phi = FeatureMap.ground_truth(target.layout, target.num_actions)
    return _finish(ALGORITHMS.ORACLE, suite, [], phi, budgets, delta, streams, options)


def scratch_baseline(
    suite: TransferSuite,
    hclass: HypothesisClass,
    budgets: TransferBudgets,
    delta: float,
    streams: RunStreams,
    options: DeploymentOptions | None = None,
    explore_options: ExploreOptions | None = None,
) -> TransferReport:
    """Learn features in the target alone, then deploy them.

    Episodes-to-solve also counts every target reset made while learning
    the model; each roll-in is one target episode.
    """
    explore_options = explore_options or ExploreOptions()
    handle = EnvHandle(suite.target, "target")
    model, run = reward_free_rep_ucb(
        handle, hclass, budgets.n_rf, streams.learner,
        delta, lambda_scale=explore_options.lambda_scale, alpha_scale=explore_options.alpha_scale,
        smoothing=explore_options.smoothing,
    )
    learning_episodes = handle.counter.resets
    report = _finish(ALGORITHMS.SCRATCH, suite, [handle], model.phi, budgets, delta, streams, options,
                     offset=learning_episodes)
    report.selections = list(model.selections)
    report.details["model_learning_episodes"] = learning_episodes
    report.details["model_learning_iterations"] = run.num_episodes
    return report


def source_only_baseline(
    suite: TransferSuite,
    hclass: HypothesisClass,
    budgets: TransferBudgets,
    delta: float,
    streams: RunStreams,
    options: DeploymentOptions | None = None,
    explore_options: ExploreOptions | None = None,
) -> TransferReport:
    """Learn features in each source alone, deploy each, keep the fastest."""
    explore_options = explore_options or ExploreOptions()
    handles = source_handles(suite)
    reports = []
    for handle in handles:
        model, _ = reward_free_rep_ucb(
            handle, hclass, budgets.n_rf, streams.learner,
            delta, lambda_scale=explore_options.lambda_scale, alpha_scale=explore_options.alpha_scale,
            smoothing=explore_options.smoothing,
        )
        handle.revoke()
        report = _finish(ALGORITHMS.SOURCE_ONLY, suite, [handle], model.phi, budgets, delta, streams, options)
        report.selections = list(model.selections)
        reports.append(report)
    best = min(range(len(reports)), key=lambda k: (reports[k].episodes_to_solve, k))
    chosen = reports[best]
    for report in reports:
        chosen.access.update({name: c for name, c in report.access.items() if name != "target"})
    chosen.details["source"] = best
    chosen.details["episodes_to_solve_per_source"] = [
        r.episodes_to_solve if math.isfinite(r.episodes_to_solve) else None for r in reports
    ]
    logger.info(f"Source-only baseline: best source {best}")
    return chosen


def run_pipeline(
    algorithm: str,
    suite: TransferSuite,
    hclass: HypothesisClass,
    budgets: TransferBudgets,
    delta: float,
    streams: RunStreams,
    options: DeploymentOptions | None = None,
    explore_options: ExploreOptions | None = None,
    oracle_exploration: bool = False,
) -> TransferReport:
    """Dispatch one algorithm by name."""
    if algorithm == ALGORITHMS.GENERATIVE:
        handles = source_handles(suite)
        policies = (
            oracle_policies(suite) if oracle_exploration
            else explore_sources(handles, hclass, budgets, delta, streams.learner, explore_options)
        )
        return rep_transfer_generative(suite, policies, hclass, budgets, delta, streams, handles, options)
    if algorithm == ALGORITHMS.ONLINE:
        policies = oracle_policies(suite) if oracle_exploration else None
        return rep_transfer_online(suite, hclass, budgets, delta, streams, policies=policies,
                                   options=options, explore_options=explore_options)
    if algorithm == ALGORITHMS.ORACLE:
        return oracle_baseline(suite, budgets, delta, streams, options)
    if algorithm == ALGORITHMS.SCRATCH:
        return scratch_baseline(suite, hclass, budgets, delta, streams, options, explore_options)
    if algorithm == ALGORITHMS.SOURCE_ONLY:
        return source_only_baseline(suite, hclass, budgets, delta, streams, options, explore_options)
    raise InvalidParameter(f"unknown algorithm: {algorithm}")
