"""Tests for layouts, Block MDPs, policies, dynamic programming and access handles."""
from __future__ import annotations

import itertools

import numpy as np
import pytest

from src.envs.comblock import build_comblock
from src.errors import AccessRevoked, InvalidParameter, UnknownObservation
from src.mdp import (
    BlockMdp,
    EnvHandle,
    GroundTruthFeatures,
    LatentPolicy,
    MixturePolicy,
    RollInPolicy,
    TabularPolicy,
    UniformPolicy,
    coverage_lambda_min,
    dp_optimal_value,
    dp_policy_value,
    latent_occupancy,
    monte_carlo_return,
    roll_in,
    roll_in_uniform,
    sample_episode,
    uniform_layout,
)


def uniform_value(horizon: int, num_actions: int) -> float:
    """Exact return of the uniform policy on a comblock: lock reward plus expected decoys."""
    stay = 1.0 / num_actions
    decoys = sum(stay ** h * (1 - stay) * 0.1 * 0.5 for h in range(horizon - 1))
    return stay ** (horizon - 1) + decoys


def test_layout_decodes_every_codeword():
    layout = uniform_layout(2, [0, 1, 2], [0, 0, 0], 2)

    assert layout.num_obs(0) == 6
    assert [layout.decode(0, o) for o in range(6)] == [0, 0, 1, 1, 2, 2]
    assert layout.group(1, 5) == 2


def test_layout_rejects_unknown_codeword():
    layout = uniform_layout(2, [0, 1], [0, 0], 1)

    with pytest.raises(UnknownObservation):
        layout.decode(0, 7)


def test_block_mdp_rejects_overlapping_emissions(comblock):
    emissions = list(comblock.emissions)
    bad = emissions[0].copy()
    bad[0] = 1.0 / bad.shape[1]
    emissions[0] = bad

    with pytest.raises(InvalidParameter):
        BlockMdp(
            horizon=comblock.horizon,
            num_actions=comblock.num_actions,
            layout=comblock.layout,
            transitions=comblock.transitions,
            emissions=tuple(emissions),
            reward_values=comblock.reward_values,
            reward_probs=comblock.reward_probs,
            initial=comblock.initial,
        )


def test_comblock_optimal_value_is_one(comblock):
    optimum, policy = dp_optimal_value(comblock)

    assert optimum == pytest.approx(1.0)
    assert dp_policy_value(comblock, policy) == pytest.approx(1.0)


def test_uniform_policy_value_matches_closed_form(comblock):
    uniform = UniformPolicy(comblock.layout, comblock.num_actions)

    assert dp_policy_value(comblock, uniform) == pytest.approx(uniform_value(4, 3), abs=1e-12)


def test_dp_value_agrees_with_monte_carlo(tiny_comblock, rng):
    policy = TabularPolicy.random(tiny_comblock.layout, tiny_comblock.num_actions, rng)
    runs = 20000
    returns = [sample_episode(tiny_comblock, policy, rng).total_reward for _ in range(runs)]
    sigma = np.std(returns) / np.sqrt(runs)

    assert abs(np.mean(returns) - dp_policy_value(tiny_comblock, policy)) <= 4 * sigma + 1e-12


def test_optimal_policy_returns_one_every_episode(comblock, rng):
    _, policy = dp_optimal_value(comblock)

    assert monte_carlo_return(comblock, policy, 50, rng) == 1.0


def test_sample_episode_records_latents_in_diagnostics_mode(comblock, rng):
    trajectory = sample_episode(comblock, UniformPolicy(comblock.layout, comblock.num_actions), rng, diagnostics=True)

    assert len(trajectory) == comblock.horizon
    assert trajectory.terminal
    for step in trajectory.steps:
        assert comblock.layout.decode(step.h, step.observation) == step.latent


def test_mixture_value_is_weighted_average(comblock):
    _, optimal = dp_optimal_value(comblock)
    uniform = UniformPolicy(comblock.layout, comblock.num_actions)
    mixture = MixturePolicy([optimal, uniform], [0.25, 0.75])

    expected = 0.25 * 1.0 + 0.75 * uniform_value(4, 3)
    assert dp_policy_value(comblock, mixture) == pytest.approx(expected)


def test_ground_truth_features_factorize_the_kernel(comblock):
    features = GroundTruthFeatures(comblock)

    for h in range(comblock.horizon - 1):
        np.testing.assert_allclose(features.kernel(h), comblock.kernel(h), atol=1e-12)


def test_switching_mixture_covers_reachable_latents(comblock):
    _, optimal = dp_optimal_value(comblock)
    mixture = MixturePolicy([RollInPolicy(optimal, s) for s in range(comblock.horizon)])

    for h in range(comblock.horizon):
        assert coverage_lambda_min(comblock, roll_in_uniform(mixture, h), h, reachable_only=True) > 0.0


def test_optimal_roll_in_misses_the_bad_latent(comblock):
    _, optimal = dp_optimal_value(comblock)

    assert coverage_lambda_min(comblock, RollInPolicy(optimal, 2), 2) == 0.0


def test_latent_policy_acts_on_decoded_latent(comblock, rng):
    actions = [np.array([1, 2, 0])] * comblock.horizon
    policy = LatentPolicy(comblock.layout, comblock.num_actions, actions)

    for obs in range(comblock.layout.num_obs(0)):
        assert policy.act(0, obs, rng) == actions[0][comblock.layout.decode(0, obs)]


def test_handle_counts_every_access(comblock, rng):
    handle = EnvHandle(comblock, "source")
    handle.begin_episode()
    obs = handle.reset(rng)
    obs = handle.step(0, obs, 0, rng)
    handle.generative_step(0, 0, 1, rng)

    assert handle.counter.as_dict() == {"episodes": 1, "resets": 1, "steps": 1, "generative": 1}


def test_handle_rejects_online_step_off_the_current_episode(comblock, rng):
    handle = EnvHandle(comblock)
    obs = handle.reset(rng)

    with pytest.raises(InvalidParameter):
        handle.step(1, obs, 0, rng)


def test_revoked_handle_refuses_access(comblock, rng):
    handle = EnvHandle(comblock)
    handle.revoke()

    with pytest.raises(AccessRevoked):
        handle.reset(rng)
    with pytest.raises(AccessRevoked):
        handle.generative_step(0, 0, 0, rng)


def test_roll_in_reaches_requested_step_without_counting_an_episode(comblock, rng):
    handle = EnvHandle(comblock)
    roll_in(handle, UniformPolicy(comblock.layout, comblock.num_actions), 2, rng)

    assert handle.counter.episodes == 0
    assert handle.counter.resets == 1
    assert handle.counter.steps == 2


def test_generative_step_past_the_last_transition_is_rejected(comblock, rng):
    with pytest.raises(InvalidParameter):
        comblock.generative_step(comblock.horizon - 1, 0, 0, rng)


def test_document_round_trip_preserves_the_model(comblock):
    rebuilt = BlockMdp.from_document(comblock.to_document())

    for h in range(comblock.horizon - 1):
        np.testing.assert_array_equal(rebuilt.kernel(h), comblock.kernel(h))
    assert rebuilt.name == comblock.name


def random_two_latent_mdp(rng, horizon=2, num_actions=2):
    """Random instance with two latents per step and one codeword per latent."""
    layout = uniform_layout(horizon, [0, 1], [0, 0], 1)
    return BlockMdp(
        horizon=horizon,
        num_actions=num_actions,
        layout=layout,
        transitions=tuple(rng.dirichlet(np.ones(2), size=(2, num_actions)) for _ in range(horizon - 1)),
        emissions=tuple(np.eye(2) for _ in range(horizon)),
        reward_values=tuple(rng.random((2, num_actions)) for _ in range(horizon)),
        reward_probs=tuple(np.ones((2, num_actions)) for _ in range(horizon)),
        initial=rng.dirichlet(np.ones(2)),
    )


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_optimal_value_matches_exhaustive_enumeration(seed):
    env = random_two_latent_mdp(np.random.default_rng(seed))
    best = max(
        dp_policy_value(env, LatentPolicy(env.layout, 2, [np.array(assignment[:2]), np.array(assignment[2:])]))
        for assignment in itertools.product(range(2), repeat=4)
    )

    optimum, _ = dp_optimal_value(env)

    assert optimum == pytest.approx(best, abs=1e-12)


def test_optimal_policy_dominates_random_policies():
    rng = np.random.default_rng(21)
    env = random_two_latent_mdp(rng, horizon=4, num_actions=3)
    optimum, optimal = dp_optimal_value(env)

    assert dp_policy_value(env, optimal) == pytest.approx(optimum)
    for _ in range(200):
        policy = TabularPolicy.random(env.layout, env.num_actions, rng)
        assert dp_policy_value(env, policy) <= optimum + 1e-12


def test_uniform_play_opens_a_ten_action_lock_once_in_a_thousand():
    env = build_comblock(4, 10, rng=np.random.default_rng(0))
    uniform = UniformPolicy(env.layout, env.num_actions)

    final = latent_occupancy(env, uniform, env.horizon - 1)

    assert final[:2].sum() == pytest.approx(1e-3)


def test_latent_occupancy_is_a_distribution_at_every_step(comblock, rng):
    _, optimal = dp_optimal_value(comblock)
    policies = [
        UniformPolicy(comblock.layout, comblock.num_actions),
        TabularPolicy.random(comblock.layout, comblock.num_actions, rng),
        optimal,
        MixturePolicy([optimal, RollInPolicy(optimal, 1)], [0.3, 0.7]),
    ]

    for policy in policies:
        for h in range(comblock.horizon):
            occupancy = latent_occupancy(comblock, policy, h)
            assert occupancy.min() >= 0.0
            assert occupancy.sum() == pytest.approx(1.0, abs=1e-9)


def test_optimal_occupancy_splits_evenly_between_good_latents(comblock):
    _, optimal = dp_optimal_value(comblock)

    for h in range(comblock.horizon):
        occupancy = latent_occupancy(comblock, optimal, h)
        for z in (0, 1):
            assert occupancy[z, optimal.latent_actions[h][z]] == pytest.approx(0.5)


def test_latent_occupancy_agrees_with_sampled_episodes(tiny_comblock, rng):
    policy = TabularPolicy.random(tiny_comblock.layout, tiny_comblock.num_actions, rng)
    runs = 20000
    counts = np.zeros((3, tiny_comblock.num_actions))
    for _ in range(runs):
        step = sample_episode(tiny_comblock, policy, rng, diagnostics=True).steps[1]
        counts[step.latent, step.action] += 1

    exact = latent_occupancy(tiny_comblock, policy, 1)
    sigma = np.sqrt(exact * (1 - exact) / runs)

    assert (np.abs(counts / runs - exact) <= 4 * sigma + 1e-3).all()


def test_generative_step_follows_the_latent_transition(comblock, rng):
    _, optimal = dp_optimal_value(comblock)
    good = optimal.latent_actions[0][0]
    wrong = (good + 1) % comblock.num_actions
    obs = comblock.emit(0, 0, rng)
    draws = 20000

    landed = np.bincount(
        [comblock.layout.decode(1, comblock.generative_step(0, obs, good, rng)) for _ in range(draws)],
        minlength=3,
    )
    expected = comblock.transitions[0][0, good]
    sigma = np.sqrt(expected * (1 - expected) / draws)

    assert (np.abs(landed / draws - expected) <= 4 * sigma + 1e-12).all()
    assert {comblock.layout.decode(1, comblock.generative_step(0, obs, wrong, rng)) for _ in range(50)} == {2}


def test_coverage_is_the_smallest_occupancy(comblock, rng):
    policy = TabularPolicy.random(comblock.layout, comblock.num_actions, rng)

    for h in range(comblock.horizon):
        assert coverage_lambda_min(comblock, policy, h) == pytest.approx(latent_occupancy(comblock, policy, h).min())


def test_coverage_counts_unreachable_latents_unless_asked_not_to(comblock):
    uniform = UniformPolicy(comblock.layout, comblock.num_actions)

    # the bad latent cannot be occupied at the first step
    assert coverage_lambda_min(comblock, uniform, 0) == 0.0
    assert coverage_lambda_min(comblock, uniform, 0, reachable_only=True) == pytest.approx(1 / 6)
