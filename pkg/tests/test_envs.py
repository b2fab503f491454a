"""Tests for comblocks, transfer suites and the lower-bound construction."""
from __future__ import annotations

import numpy as np
import pytest

from src.envs import (
    TransferSuite,
    build_comblock,
    build_comblock_mixture_suite,
    build_mixture_target,
    build_partitioned_suite,
    build_shared_emission_suite,
    optimal_actions_of,
)
from src.envs.comblock import BAD_LATENT, draw_optimal_actions
from src.errors import InvalidParameter, InvalidWeights, SpanCoefficientsMissing
from src.mdp import dp_optimal_value


def test_comblock_wrong_action_leads_to_the_bad_latent(comblock):
    table = optimal_actions_of(comblock)

    for h, T in enumerate(comblock.transitions):
        for z in (0, 1):
            for a in range(comblock.num_actions):
                if a == table[h, z]:
                    assert T[z, a, :2].sum() == pytest.approx(1.0)
                else:
                    assert T[z, a, BAD_LATENT] == 1.0
        assert T[BAD_LATENT, :, BAD_LATENT].min() == 1.0


@pytest.mark.parametrize("horizon, num_actions", [(0, 4), (5, 1)])
def test_comblock_rejects_invalid_dimensions(horizon, num_actions):
    with pytest.raises(InvalidParameter):
        build_comblock(horizon, num_actions, seed=0)


def test_distinct_optimal_actions_differ_between_good_latents(rng):
    actions = draw_optimal_actions(8, 2, rng, distinct=True)

    assert (actions[:, 0] != actions[:, 1]).all()


def test_noisy_comblock_emits_decodable_codewords(rng):
    env = build_comblock(4, 3, emission_mode="noisy", rng=rng, noise_scale=0.05)

    for z in range(3):
        obs = env.emit(2, z, rng)
        assert env.layout.decode(2, obs) == z


@pytest.mark.parametrize("build", [
    lambda rng: build_shared_emission_suite(3, 5, rng),
    lambda rng: build_partitioned_suite(2, 5, rng),
    lambda rng: build_comblock_mixture_suite(3, 5, rng, weights=[0.2, 0.3, 0.5]),
])
def test_target_lies_in_the_span_of_the_sources(build, rng):
    suite = build(rng)

    assert suite.span_error() < 1e-9


def test_shared_emission_target_copies_a_source_at_every_step(shared_suite):
    choice = shared_suite.notes["source_choice"]

    for h, k in enumerate(choice):
        np.testing.assert_array_equal(shared_suite.target.transitions[h], shared_suite.sources[k].transitions[h])
    assert shared_suite.alpha_bar == pytest.approx(1.0)


def test_shared_emission_suite_needs_two_sources(rng):
    with pytest.raises(InvalidParameter):
        build_shared_emission_suite(1, 4, rng)


def test_partitioned_sources_emit_into_their_own_block(partitioned_suite):
    layout = partitioned_suite.target.layout

    for k, source in enumerate(partitioned_suite.sources):
        for h in range(source.horizon):
            support = np.flatnonzero(source.emissions[h].sum(axis=0))
            blocks = {layout.block(h, int(o)) for o in support}
            assert blocks == {k}


def test_partitioned_tasks_share_the_optimal_value(partitioned_suite):
    values = [dp_optimal_value(task)[0] for task in partitioned_suite.tasks]

    assert values == pytest.approx([1.0] * len(values))


def test_mixture_target_kernel_is_the_weighted_source_kernel(rng):
    suite = build_comblock_mixture_suite(2, 4, rng, weights=[0.25, 0.75])
    first, second = suite.sources

    np.testing.assert_allclose(suite.target.kernel(1), 0.25 * first.kernel(1) + 0.75 * second.kernel(1), atol=1e-12)
    assert suite.alpha_bar == pytest.approx(1.0)


def test_mixture_rejects_weights_off_the_simplex(rng):
    sources = build_comblock_mixture_suite(2, 4, rng).sources

    with pytest.raises(InvalidWeights):
        build_mixture_target(sources, [0.7, 0.7])


def test_mixture_rejects_unrelated_sources(rng):
    shared = build_shared_emission_suite(2, 4, rng).sources[0]
    partitioned = build_partitioned_suite(2, 4, rng)
    other = partitioned.sources[1]

    with pytest.raises(InvalidWeights):
        build_mixture_target([shared, other], [0.5, 0.5])


def test_suite_without_span_record_reports_it(comblock):
    suite = TransferSuite(sources=[comblock], target=comblock)

    with pytest.raises(SpanCoefficientsMissing):
        suite.alpha_bar


def test_suite_document_round_trip(partitioned_suite):
    rebuilt = TransferSuite.from_document(partitioned_suite.to_document())

    assert rebuilt.name == partitioned_suite.name
    assert rebuilt.span_error() < 1e-9


def test_lower_bound_sources_differ_only_in_emission_block(lower_bound):
    first, second = lower_bound.sources

    np.testing.assert_array_equal(first.transitions[0], second.transitions[0])
    assert not np.array_equal(first.emissions[0], second.emissions[0])
    assert lower_bound.suite.span_error() < 1e-9
    assert dp_optimal_value(lower_bound.target)[0] == pytest.approx(1.0)
