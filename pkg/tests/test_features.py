"""Tests for decoder classes, transition counts and maximum-likelihood selection."""
from __future__ import annotations

import math

import numpy as np
import pytest

from src.errors import EmptyDataset, InvalidParameter, MismatchedTasks, SpanCoefficientsMissing, UnknownObservation
from src.features import (
    DecoderCandidate,
    FeatureMap,
    HypothesisClass,
    TransitionCounts,
    TransitionDataset,
    build_decoder_class,
    canonical_labels,
    decoder_confusion,
    embedding_norm_ratio,
    mle_bound_zeta,
    mle_multitask,
    mle_single_task,
    model_tv_error,
    population_model,
    target_span_model,
)
from src.features.decoders import restricted_growth_strings, stirling_count
from src.mdp import UniformPolicy


def generative_dataset(env, task_pair, n, rng, planter=None):
    """``n`` tuples per step: ``planter`` emits a uniform latent, ``env`` steps it."""
    planter = planter or env
    tuples = {}
    for h in range(env.horizon - 1):
        rows = []
        for _ in range(n):
            z = int(rng.integers(planter.layout.num_latents(h)))
            s = planter.emit(h, z, rng)
            a = int(rng.integers(env.num_actions))
            rows.append((s, a, env.generative_step(h, s, a, rng)))
        tuples[h] = np.array(rows)
    return TransitionDataset(task_pair=task_pair, tuples=tuples)


def truth_or_constant(env):
    truth = FeatureMap.ground_truth(env.layout, env.num_actions)
    constant = FeatureMap.constant(env.layout, env.num_actions)
    candidates = [[constant.decoders[h], truth.decoders[h]] for h in range(env.horizon)]
    return HypothesisClass(env.layout, env.num_actions, candidates, realizable=True)


def test_canonical_labels_number_by_first_appearance():
    np.testing.assert_array_equal(canonical_labels([2, 2, 0, 1, 0]), [0, 0, 1, 2, 1])


def test_same_partition_ignores_label_names():
    a = DecoderCandidate.from_labels([1, 1, 0], canonical=False)
    b = DecoderCandidate.from_labels([0, 0, 1])

    assert a.same_partition(b)
    assert not a.same_partition(DecoderCandidate.from_labels([0, 1, 1]))


@pytest.mark.parametrize("items, max_labels, expected", [(3, 3, 5), (4, 2, 8), (6, 3, 122)])
def test_restricted_growth_strings_match_stirling_count(items, max_labels, expected):
    strings = list(restricted_growth_strings(items, max_labels))

    assert stirling_count(items, max_labels) == expected
    assert len(strings) == expected
    assert len(set(strings)) == expected


def test_decoder_class_is_realizable(comblock, rng):
    hclass = build_decoder_class(comblock.layout, comblock.num_actions, rng)

    assert hclass.realizable
    assert hclass.size_phi == 5


def test_decoder_class_falls_back_to_block_bijections(partitioned_suite, rng):
    env = partitioned_suite.target
    hclass = build_decoder_class(env.layout, env.num_actions, rng, max_candidates=10)

    assert hclass.realizable
    assert hclass.size_phi <= 10


def test_feature_tensor_is_one_hot(comblock):
    phi = FeatureMap.ground_truth(comblock.layout, comblock.num_actions)
    tensor = phi.feature_tensor(1)

    assert tensor.shape == (3, 3, 9)
    np.testing.assert_array_equal(tensor.sum(axis=2), np.ones((3, 3)))
    assert phi.max_dimension == 9


def test_counts_reject_out_of_range_tasks(tiny_comblock):
    counts = TransitionCounts(tiny_comblock.layout, tiny_comblock.num_actions, num_tasks=2)

    with pytest.raises(MismatchedTasks):
        counts.add(TransitionDataset(task_pair=(2, 0), tuples={0: [[0, 0, 0]]}))


def test_counts_reject_unknown_codewords(tiny_comblock):
    counts = TransitionCounts(tiny_comblock.layout, tiny_comblock.num_actions, num_tasks=1)

    with pytest.raises(UnknownObservation):
        counts.add(TransitionDataset(task_pair=(0, 0), tuples={0: [[0, 0, 999]]}))


def test_dataset_rejects_unknown_mode():
    with pytest.raises(InvalidParameter):
        TransitionDataset(task_pair=(0, 0), mode="replay")


def test_mle_rejects_empty_input(tiny_comblock):
    hclass = truth_or_constant(tiny_comblock)

    with pytest.raises(EmptyDataset):
        mle_multitask([], hclass)
    with pytest.raises(EmptyDataset):
        mle_multitask([TransitionDataset(task_pair=(0, 0))], hclass)


def test_mle_rejects_task_index_beyond_count(tiny_comblock, rng):
    hclass = truth_or_constant(tiny_comblock)
    dataset = generative_dataset(tiny_comblock, (1, 0), 5, rng)

    with pytest.raises(MismatchedTasks):
        mle_multitask([dataset], hclass, num_tasks=1)


def test_single_task_mle_recovers_the_true_decoder(comblock, rng):
    hclass = truth_or_constant(comblock)
    datasets = [generative_dataset(comblock, (3, 3), 400, rng)]

    model = mle_single_task(datasets, hclass)

    assert model.phi.same_partition(FeatureMap.ground_truth(comblock.layout, comblock.num_actions))
    uniform = UniformPolicy(comblock.layout, comblock.num_actions)
    assert model_tv_error(model, comblock, uniform).max() < 0.2


def test_online_data_cannot_separate_the_lower_bound_decoders(lower_bound, rng):
    hclass = HypothesisClass.from_labelings(lower_bound.layout, 2, lower_bound.candidate_labels())
    datasets = [generative_dataset(source, (k, k), 200, rng) for k, source in enumerate(lower_bound.sources)]

    fit = mle_multitask(datasets, hclass)

    assert [s.h for s in fit.ties] == [0]
    assert fit.selections[0].tied == (0, 1)


def test_cross_data_separates_the_lower_bound_decoders(lower_bound, rng):
    hclass = HypothesisClass.from_labelings(lower_bound.layout, 2, lower_bound.candidate_labels())
    sources = lower_bound.sources
    datasets = [
        generative_dataset(sources[i], (i, j), 200, rng, planter=sources[j])
        for i in range(2) for j in range(2)
    ]

    fit = mle_multitask(datasets, hclass)

    assert not fit.ties
    correct = DecoderCandidate.from_labels(lower_bound.correct_labels[0])
    assert fit.phi.decoders[0].same_partition(correct)


def test_last_step_uses_the_finest_candidate(tiny_comblock, rng):
    hclass = truth_or_constant(tiny_comblock)
    fit = mle_multitask([generative_dataset(tiny_comblock, (0, 0), 20, rng)], hclass)

    last = fit.selections[-1]
    assert last.no_data
    assert last.index == hclass.finest(tiny_comblock.horizon - 1)


def test_mle_bound_zeta():
    expected = (math.log(10 / 0.1) + 2 * math.log(10)) / 10

    assert mle_bound_zeta(10, 10, 10, 2, 0.1) == pytest.approx(expected)
    with pytest.raises(InvalidParameter):
        mle_bound_zeta(10, 10, 10, 2, 1.0)
    with pytest.raises(InvalidParameter):
        mle_bound_zeta(0, 10, 10, 2, 0.1)


def test_population_model_of_the_true_decoder_is_exact(comblock):
    phi = FeatureMap.ground_truth(comblock.layout, comblock.num_actions)
    uniform = UniformPolicy(comblock.layout, comblock.num_actions)

    model = population_model(comblock, phi, uniform)

    assert model_tv_error(model, comblock, uniform).max() < 1e-9


def test_model_simulates_valid_codewords(comblock, rng):
    phi = FeatureMap.ground_truth(comblock.layout, comblock.num_actions)
    model = population_model(comblock, phi, UniformPolicy(comblock.layout, comblock.num_actions))

    obs = model.reset(rng)
    assert comblock.layout.decode(0, obs) in (0, 1)
    for h in range(comblock.horizon - 1):
        obs = model.step(h, obs, 0, rng)
        assert 0 <= obs < comblock.layout.num_obs(h + 1)
    with pytest.raises(InvalidParameter):
        model.step(comblock.horizon - 1, obs, 0, rng)


def test_true_decoder_confusion_is_identity(comblock):
    phi = FeatureMap.ground_truth(comblock.layout, comblock.num_actions)

    for h in range(comblock.horizon):
        np.testing.assert_allclose(decoder_confusion(phi, comblock, h), np.eye(3))


def test_span_model_needs_coefficients(comblock):
    phi = FeatureMap.ground_truth(comblock.layout, comblock.num_actions)
    model = population_model(comblock, phi, UniformPolicy(comblock.layout, comblock.num_actions))

    with pytest.raises(SpanCoefficientsMissing):
        target_span_model([model.emission_embedding()], None)


def test_span_model_reproduces_the_shared_emission_target(shared_suite):
    phi = FeatureMap.ground_truth(shared_suite.target.layout, shared_suite.num_actions)
    embeddings = [
        population_model(source, phi, UniformPolicy(source.layout, source.num_actions)).emission_embedding()
        for source in shared_suite.sources
    ]

    mu_tilde = target_span_model(embeddings, shared_suite.span_coefficients)

    # every latent is reachable from step 1 on
    for h in range(1, shared_suite.horizon - 1):
        np.testing.assert_allclose(mu_tilde.kernel(phi, h), shared_suite.target.kernel(h), atol=1e-9)


def test_learned_embeddings_respect_the_norm_bound(comblock, rng):
    phi = FeatureMap.ground_truth(comblock.layout, comblock.num_actions)
    exact = population_model(comblock, phi, UniformPolicy(comblock.layout, comblock.num_actions))
    learned = mle_single_task([generative_dataset(comblock, (0, 0), 200, rng)], truth_or_constant(comblock))

    for model in (exact, learned):
        assert embedding_norm_ratio(model.emission_embedding(), rng) <= 1.0 + 1e-9


def test_permuted_decoder_misses_half_of_the_lower_bound_kernel(lower_bound):
    target = lower_bound.target
    uniform = UniformPolicy(target.layout, target.num_actions)
    correct = FeatureMap.from_labels(target.layout, 2, lower_bound.correct_labels)
    permuted = FeatureMap.from_labels(target.layout, 2, lower_bound.permuted_labels)

    np.testing.assert_allclose(model_tv_error(population_model(target, correct, uniform), target, uniform), [0.0],
                               atol=1e-9)
    np.testing.assert_allclose(model_tv_error(population_model(target, permuted, uniform), target, uniform), [0.5],
                               atol=1e-9)


@pytest.mark.slow
def test_mle_selects_the_true_decoder_across_seeds(tiny_comblock):
    hclass = build_decoder_class(tiny_comblock.layout, tiny_comblock.num_actions, np.random.default_rng(0))
    truth = FeatureMap.ground_truth(tiny_comblock.layout, tiny_comblock.num_actions)
    hits = 0
    for seed in range(20):
        dataset = generative_dataset(tiny_comblock, (0, 0), 2000, np.random.default_rng(seed))
        model = mle_single_task([dataset], hclass)
        hits += all(model.phi.decoders[h].same_partition(truth.decoders[h]) for h in range(tiny_comblock.horizon - 1))

    assert hits >= 19


@pytest.mark.slow
def test_squared_model_error_shrinks_like_one_over_n(tiny_comblock):
    hclass = truth_or_constant(tiny_comblock)
    uniform = UniformPolicy(tiny_comblock.layout, tiny_comblock.num_actions)
    sizes = [100, 200, 400, 800]
    errors = []
    for n in sizes:
        squared = [
            model_tv_error(
                mle_single_task([generative_dataset(tiny_comblock, (0, 0), n, np.random.default_rng(seed))], hclass),
                tiny_comblock, uniform,
            ).sum() ** 2
            for seed in range(30)
        ]
        errors.append(np.mean(squared))

    slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
    assert -1.3 <= slope <= -0.7
