"""Tests for cross sampling, deployment, the pipelines and the lower-bound verifier."""
from __future__ import annotations

import json

import numpy as np
import pytest

from src.constants import ALGORITHMS, FILES, SAMPLING
from src.errors import InvalidParameter, MismatchedTasks
from src.explore import oracle_exploratory_policy
from src.features import FeatureMap, build_decoder_class, mle_multitask, span_model_tv, target_span_model
from src.mdp import EnvHandle
from src.seeding import RunStreams
from src.transfer import (
    DeploymentOptions,
    TransferBudgets,
    cross_sample,
    deploy,
    lower_bound_demo,
    on_policy_sample,
    oracle_policies,
    run_pipeline,
    source_handles,
    verify_lower_bound,
)
from src.transfer.deployment import deployment_beta

FAST = DeploymentOptions(beta=1.0, solve_interval=10, solve_runs=20, solve_consecutive=2)


def small_budgets(n=10, t_deploy=300):
    return TransferBudgets(n_rf=20, n_lsvi=20, n=n, t_deploy=t_deploy)


def test_cross_sample_plants_states_across_tasks(shared_suite, rng):
    handles = source_handles(shared_suite)
    policies = oracle_policies(shared_suite)

    dataset = cross_sample(handles, policies, 0, 1, 1, 10, rng)

    assert dataset.task_pair == (0, 1)
    assert dataset.mode == SAMPLING.CROSS
    assert dataset.size(1) == 10
    assert handles[0].counter.generative == 10
    assert handles[1].counter.generative == 10
    assert handles[1].counter.episodes == 0


def test_cross_sample_at_the_first_step_resets_the_planter(shared_suite, rng):
    handles = source_handles(shared_suite)

    cross_sample(handles, oracle_policies(shared_suite), 0, 1, 0, 10, rng)

    assert handles[1].counter.resets == 10
    assert handles[0].counter.resets == 0
    assert handles[0].counter.generative == 10


def test_generative_access_per_source(shared_suite, rng):
    handles = source_handles(shared_suite)
    policies = oracle_policies(shared_suite)
    n = 10

    for i in range(2):
        for j in range(2):
            for h in range(shared_suite.horizon - 1):
                cross_sample(handles, policies, i, j, h, n, rng)

    # K*n at the first step plus (2K-1)*n at every later transition step
    assert [handle.counter.generative for handle in handles] == [50, 50]


def test_cross_sample_validates_its_arguments(shared_suite, rng):
    handles = source_handles(shared_suite)
    policies = oracle_policies(shared_suite)

    with pytest.raises(MismatchedTasks):
        cross_sample(handles, policies, 2, 0, 0, 5, rng)
    with pytest.raises(InvalidParameter):
        cross_sample(handles, policies, 0, 0, shared_suite.horizon - 1, 5, rng)
    with pytest.raises(InvalidParameter):
        cross_sample(handles, policies, 0, 0, 0, 0, rng)


def test_on_policy_sample_uses_online_access_only(comblock, rng):
    handle = EnvHandle(comblock, "source-0")

    dataset = on_policy_sample(handle, oracle_exploratory_policy(comblock), 0, 2, 25, rng)

    assert dataset.mode == SAMPLING.ON_POLICY
    assert dataset.size(2) == 25
    assert handle.counter.episodes == 25
    assert handle.counter.generative == 0


def test_lower_bound_gaps(lower_bound):
    correct = FeatureMap.from_labels(lower_bound.layout, 2, lower_bound.correct_labels)
    permuted = FeatureMap.from_labels(lower_bound.layout, 2, lower_bound.permuted_labels)

    assert verify_lower_bound(lower_bound, correct) == pytest.approx(0.0, abs=1e-9)
    assert verify_lower_bound(lower_bound, permuted) == pytest.approx(0.5, abs=1e-9)


def test_lower_bound_demo_separates_only_with_cross_samples(lower_bound, rng):
    demo = lower_bound_demo(lower_bound, 300, rng)

    assert [s.h for s in demo.online_fit.ties] == [0]
    assert not demo.generative_fit.ties
    assert demo.details["generative_gap"] == pytest.approx(0.0, abs=1e-9)
    assert demo.to_document()["gaps"]["permuted"] == pytest.approx(0.5)


def test_budgets_must_be_positive():
    with pytest.raises(InvalidParameter):
        TransferBudgets(n_rf=10, n_lsvi=10, n=0, t_deploy=10)
    with pytest.raises(InvalidParameter):
        TransferBudgets(n_rf=1, n_lsvi=10, n=10, t_deploy=10)


def test_deployment_beta_prefers_the_fixed_value(comblock):
    phi = FeatureMap.ground_truth(comblock.layout, comblock.num_actions)

    assert deployment_beta(phi, 100, 0.1, 1.0, DeploymentOptions(beta=2.0, beta_scale=0.5)) == 1.0
    theoretical = deployment_beta(phi, 100, 0.1, 1.0, DeploymentOptions(beta_scale=0.5))
    assert theoretical > 1.0


def test_deploy_with_true_features_solves_the_target(tiny_comblock):
    phi = FeatureMap.ground_truth(tiny_comblock.layout, tiny_comblock.num_actions)
    streams = RunStreams.from_seed(0)

    result = deploy(tiny_comblock, phi, 300, 0.1, 1.0, streams.policy, streams.evaluation, FAST)

    assert result.trace.solved
    assert result.access.episodes == result.trace.num_episodes
    assert result.access.generative == 0


def test_deploy_runs_the_whole_budget_without_early_stop(tiny_comblock):
    phi = FeatureMap.ground_truth(tiny_comblock.layout, tiny_comblock.num_actions)
    streams = RunStreams.from_seed(1)
    options = DeploymentOptions(beta=1.0, stop_when_solved=False, solve_interval=10, solve_runs=5)

    result = deploy(tiny_comblock, phi, 40, 0.1, 1.0, streams.policy, streams.evaluation, options)

    assert result.trace.num_episodes == 40


def test_oracle_pipeline_writes_its_report(shared_suite, rng, tmp_path):
    hclass = build_decoder_class(shared_suite.target.layout, shared_suite.num_actions, rng)

    report = run_pipeline(ALGORITHMS.ORACLE, shared_suite, hclass, small_budgets(), 0.1,
                          RunStreams.from_seed(0), FAST)
    files = report.write(tmp_path)

    assert report.solved
    assert report.source_access().as_dict() == {"episodes": 0, "resets": 0, "steps": 0, "generative": 0}
    assert {p.name for p in files} == {FILES.REPORT, FILES.REGRET, FILES.CONFUSION}
    with open(tmp_path / FILES.REPORT, encoding="utf-8") as f:
        document = json.load(f)
    assert document["algorithm"] == ALGORITHMS.ORACLE
    assert document["episodes_to_solve"] == report.episodes_to_solve


def test_generative_pipeline_charges_cross_samples_to_sources(shared_suite, rng):
    hclass = build_decoder_class(shared_suite.target.layout, shared_suite.num_actions, rng)
    n = 20

    report = run_pipeline(ALGORITHMS.GENERATIVE, shared_suite, hclass, small_budgets(n=n), 0.1,
                          RunStreams.from_seed(2), FAST, oracle_exploration=True)

    assert report.access["source-0"].generative == 5 * n
    assert report.access["source-1"].generative == 5 * n
    assert report.access["target"].generative == 0
    assert report.span_tv is not None
    assert len(report.confusion) == shared_suite.horizon
    assert len(report.coverage) == 2


def test_online_pipeline_never_uses_generative_access(shared_suite, rng):
    hclass = build_decoder_class(shared_suite.target.layout, shared_suite.num_actions, rng)

    report = run_pipeline(ALGORITHMS.ONLINE, shared_suite, hclass, small_budgets(), 0.1,
                          RunStreams.from_seed(3), FAST, oracle_exploration=True)

    assert report.source_access().generative == 0
    assert report.source_access().episodes > 0


def test_scratch_pipeline_charges_every_model_learning_reset(shared_suite, rng):
    hclass = build_decoder_class(shared_suite.target.layout, shared_suite.num_actions, rng)

    report = run_pipeline(ALGORITHMS.SCRATCH, shared_suite, hclass, small_budgets(), 0.1,
                          RunStreams.from_seed(4), FAST)

    # one roll-in per step plus one shifted roll-in per step after the first
    learning = 20 * (2 * shared_suite.horizon - 3)
    assert report.details["model_learning_iterations"] == 20
    assert report.details["model_learning_episodes"] == learning
    assert report.access["target"].resets >= learning
    if report.solved:
        assert report.episodes_to_solve > learning


def test_unknown_algorithm_is_rejected(shared_suite, rng):
    hclass = build_decoder_class(shared_suite.target.layout, shared_suite.num_actions, rng)

    with pytest.raises(InvalidParameter):
        run_pipeline("fine-tune", shared_suite, hclass, small_budgets(), 0.1, RunStreams.from_seed(0))


def span_tv_after_cross_sampling(suite, n, seed, num_policies=20):
    """Span-model TV of the multitask fit on ``n`` cross samples per task pair and step."""
    rng = np.random.default_rng(seed)
    hclass = build_decoder_class(suite.target.layout, suite.num_actions, rng)
    handles = source_handles(suite)
    policies = oracle_policies(suite)
    K = suite.num_sources
    datasets = [
        cross_sample(handles, policies, i, j, h, n, rng)
        for i in range(K)
        for j in range(K)
        for h in range(suite.horizon - 1)
    ]
    fit = mle_multitask(datasets, hclass, num_tasks=K)
    mu_tilde = target_span_model([m.emission_embedding() for m in fit.models], suite.span_coefficients)
    return span_model_tv(fit.phi, mu_tilde, suite.target, rng, num_policies)


def test_span_model_error_shrinks_with_more_cross_samples(shared_suite):
    few = np.mean([span_tv_after_cross_sampling(shared_suite, 10, seed) for seed in range(3)])
    many = np.mean([span_tv_after_cross_sampling(shared_suite, 400, seed) for seed in range(3)])

    assert many < few


@pytest.mark.slow
def test_span_model_error_is_small_at_two_thousand_samples(shared_suite):
    errors = [span_tv_after_cross_sampling(shared_suite, 2000, seed, num_policies=100) for seed in range(3)]

    assert np.median(errors) < 0.1
