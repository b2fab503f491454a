"""Tests for in-model planning, reward-free model learning and exploratory policies."""
from __future__ import annotations

import math

import numpy as np
import pytest

from src.errors import DimensionMismatch, InvalidParameter, PlanningSupportEmpty
from src.explore import (
    bonus_scales,
    bonus_tables,
    eps,
    measure_coverage,
    oracle_exploratory_policy,
    plan_in_model,
    reward_free_rep_ucb,
)
from src.features import FeatureMap, LinearMdpModel, build_decoder_class, population_model
from src.envs.comblock import build_comblock
from src.mdp import EnvHandle, UniformPolicy, dp_policy_value


def true_model(env):
    phi = FeatureMap.ground_truth(env.layout, env.num_actions)
    return population_model(env, phi, UniformPolicy(env.layout, env.num_actions))


def test_bonus_scales_at_the_first_episode():
    alpha, lam = bonus_scales(0, 4, 2, 2, 5, 0.5)

    assert lam == pytest.approx(4 * math.log(2 * 5 / 0.5))
    zeta = math.log(5 / 0.5) + math.log(5)
    assert alpha == pytest.approx(math.sqrt(4 * zeta + lam * 4))


def test_bonus_scales_follow_their_multipliers():
    alpha, lam = bonus_scales(9, 6, 3, 2, 5, 0.1)
    scaled_alpha, scaled_lam = bonus_scales(9, 6, 3, 2, 5, 0.1, lambda_scale=2.0, alpha_scale=0.5)

    assert scaled_lam == pytest.approx(2 * lam)
    assert scaled_alpha < alpha


def test_bonus_tables_shrink_with_visits(tiny_comblock):
    phi = FeatureMap.ground_truth(tiny_comblock.layout, tiny_comblock.num_actions)
    empty = [np.zeros((3, 2)) for _ in range(3)]
    visited = [np.full((3, 2), 10.0) for _ in range(3)]

    before = bonus_tables(phi, empty, alpha=1.0, lam=1.0)
    after = bonus_tables(phi, visited, alpha=1.0, lam=1.0)

    np.testing.assert_allclose(before[0], np.ones((3, 2)))
    np.testing.assert_allclose(after[0], np.full((3, 2), 1 / math.sqrt(11)))


def test_planning_in_the_true_model_finds_the_optimal_policy(comblock):
    plan = plan_in_model(true_model(comblock), comblock.group_rewards())

    assert plan.value == pytest.approx(1.0)
    assert dp_policy_value(comblock, plan.policy) == pytest.approx(1.0)


def test_planning_rejects_mismatched_rewards(comblock):
    with pytest.raises(DimensionMismatch):
        plan_in_model(true_model(comblock), comblock.group_rewards()[:-1])


def test_planning_needs_observed_support(tiny_comblock):
    phi = FeatureMap.ground_truth(tiny_comblock.layout, tiny_comblock.num_actions)
    empty = LinearMdpModel(
        phi=phi,
        transition_counts=tuple(np.zeros((3, 2, 3)) for _ in range(2)),
        observation_counts=tuple(np.zeros(tiny_comblock.layout.num_obs(h)) for h in range(3)),
    )

    with pytest.raises(PlanningSupportEmpty):
        plan_in_model(empty, tiny_comblock.group_rewards())


def test_reward_free_rep_ucb_validates_its_budget(tiny_comblock, rng):
    hclass = build_decoder_class(tiny_comblock.layout, tiny_comblock.num_actions, rng)

    with pytest.raises(InvalidParameter):
        reward_free_rep_ucb(EnvHandle(tiny_comblock), hclass, 1, rng)
    with pytest.raises(InvalidParameter):
        reward_free_rep_ucb(EnvHandle(tiny_comblock), hclass, 10, rng, delta=1.5)


def test_reward_free_rep_ucb_selects_from_the_second_half(tiny_comblock, rng):
    handle = EnvHandle(tiny_comblock, "source-0")
    hclass = build_decoder_class(tiny_comblock.layout, tiny_comblock.num_actions, rng)

    model, run = reward_free_rep_ucb(handle, hclass, 30, rng)

    assert run.num_episodes == 30
    assert 15 <= run.selected < 30
    assert run.values[run.selected] == min(run.values[15:])
    assert handle.counter.episodes == 30
    assert handle.counter.generative == 0
    assert handle.counter.resets == 30 * (2 * tiny_comblock.horizon - 3)
    assert model.horizon == tiny_comblock.horizon


def test_eps_explores_without_touching_the_environment_in_the_model(tiny_comblock, rng):
    handle = EnvHandle(tiny_comblock, "source-0")
    hclass = build_decoder_class(tiny_comblock.layout, tiny_comblock.num_actions, rng)

    policy = eps(handle, hclass, num_lsvi_episodes=20, num_rf_episodes=30, delta=0.1, rng=rng)

    assert handle.counter.episodes == 30
    assert len(policy.mixture) == 20
    assert policy.coverage.shape == (tiny_comblock.horizon,)
    assert (policy.coverage >= 0).all()
    assert policy.to_document()["components"] == 20


def test_oracle_exploratory_policy_covers_every_step(comblock):
    policy = oracle_exploratory_policy(comblock)

    assert len(policy.mixture) == comblock.horizon
    assert (policy.coverage > 0).all()
    np.testing.assert_allclose(measure_coverage(comblock, policy.mixture), policy.coverage)


@pytest.mark.slow
def test_eps_covers_a_five_step_lock_in_most_seeds():
    covered = 0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        env = build_comblock(5, 4, rng=rng)
        hclass = build_decoder_class(env.layout, env.num_actions, rng)

        policy = eps(EnvHandle(env, "source-0"), hclass, num_lsvi_episodes=2000, num_rf_episodes=3000,
                     delta=0.1, rng=rng)
        covered += bool((policy.coverage > 0.01).all())

    assert covered >= 4
