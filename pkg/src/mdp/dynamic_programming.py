"""
Exact dynamic-programming oracles over the latent state space.

These use ground-truth latent quantities and serve as evaluation and
diagnostic tools; learners never call them for decisions.
"""
from __future__ import annotations

import numpy as np

from src.errors import DimensionMismatch, InvalidParameter
from src.mdp.block_mdp import BlockMdp
from src.mdp.policies import LatentPolicy, MarkovPolicy, Policy


def _check_reward(env: BlockMdp, reward: list[np.ndarray] | None) -> list[np.ndarray]:
    if reward is None:
        return env.latent_rewards()
    reward = [np.asarray(r, dtype=float) for r in reward]
    if len(reward) != env.horizon:
        raise DimensionMismatch(f"reward covers {len(reward)} steps, expected {env.horizon}")
    for h, r in enumerate(reward):
        if r.shape != (env.latent_counts[h], env.num_actions):
            raise DimensionMismatch(f"reward at step {h} must have shape {(env.latent_counts[h], env.num_actions)}")
    return reward


def _markov_occupancies(env: BlockMdp, policy: MarkovPolicy) -> list[np.ndarray]:
    """Forward recursion for one Markov policy, all steps."""
    occupancies = []
    state = env.initial
    for h in range(env.horizon):
        joint = state[:, None] * policy.latent_action_probs(env, h)
        occupancies.append(joint)
        if h < env.horizon - 1:
            state = np.einsum("za,zay->y", joint, env.transitions[h])
    return occupancies


def occupancy_table(env: BlockMdp, policy: Policy) -> list[np.ndarray]:
    """Return the latent state-action occupancy ``d_h(z, a)`` for every step."""
    table = [np.zeros((env.latent_counts[h], env.num_actions)) for h in range(env.horizon)]
    for weight, component in policy.components():
        for h, occupancy in enumerate(_markov_occupancies(env, component)):
            table[h] += weight * occupancy
    return table


def latent_occupancy(env: BlockMdp, policy: Policy, h: int) -> np.ndarray:
    """Exact occupancy over ``(z, a)`` at step ``h``.

    Raises:
        InvalidParameter: If ``h`` is outside the horizon.
    """
    if h < 0 or h >= env.horizon:
        raise InvalidParameter(f"step {h} outside horizon {env.horizon}")
    return occupancy_table(env, policy)[h]


def observation_occupancy(env: BlockMdp, policy: Policy, h: int) -> np.ndarray:
    """Exact occupancy over ``(observation, action)`` at step ``h``, shape ``(O_h, A)``."""
    if h < 0 or h >= env.horizon:
        raise InvalidParameter(f"step {h} outside horizon {env.horizon}")
    group_of = env.layout.step(h).group_of
    total = np.zeros((env.layout.num_obs(h), env.num_actions))
    for weight, component in policy.components():
        latent_marginal = _markov_occupancies(env, component)[h].sum(axis=1)
        obs_marginal = latent_marginal @ env.emissions[h]
        total += weight * obs_marginal[:, None] * component.group_action_probs(h)[group_of]
    return total


def dp_policy_value(env: BlockMdp, policy: Policy, reward: list[np.ndarray] | None = None) -> float:
    """Exact expected return of ``policy`` (occupancy times mean reward)."""
    reward = _check_reward(env, reward)
    table = occupancy_table(env, policy)
    return float(sum(np.sum(table[h] * reward[h]) for h in range(env.horizon)))


def dp_optimal_value(env: BlockMdp, reward: list[np.ndarray] | None = None) -> tuple[float, LatentPolicy]:
    """Backward induction over latent states.

    Args:
        env: Environment.
        reward: Mean reward tables ``(Z_h, A)`` per step; defaults to the env's.

    Returns:
        ``(V*, pi*)`` where ``V* = E_{d0}[V*_0]`` and ``pi*`` breaks ties
        towards the lowest action index.
    """
    reward = _check_reward(env, reward)
    actions: list[np.ndarray] = [np.zeros(0, dtype=np.int64)] * env.horizon
    value_next = np.zeros(0)
    for h in reversed(range(env.horizon)):
        q = reward[h].copy()
        if h < env.horizon - 1:
            q += env.transitions[h] @ value_next
        actions[h] = np.argmax(q, axis=1)
        value_next = q.max(axis=1)
    return float(env.initial @ value_next), LatentPolicy(env.layout, env.num_actions, actions)


def reachable_latents(env: BlockMdp, h: int) -> np.ndarray:
    """Boolean mask of latents reachable at step ``h`` under some policy."""
    reach = env.initial > 0
    for k in range(h):
        reach = (env.transitions[k][reach] > 0).any(axis=(0, 1))
    return reach


def coverage_lambda_min(env: BlockMdp, policy: Policy, h: int, reachable_only: bool = False) -> float:
    """Minimum eigenvalue of ``E_pi[phi* phi*^T]`` at step ``h``.

    Args:
        env: Environment providing the ground-truth one-hot features.
        policy: Policy whose occupancy defines the expectation.
        h: Step index.
        reachable_only: Restrict the feature space to latents some policy can
            reach at ``h``; unreachable latents pin the full value to zero.

    Returns:
        The smallest eigenvalue of the feature second-moment matrix.
    """
    occupancy = latent_occupancy(env, policy, h)
    # one-hot features: the second moment is diag(occupancy)
    if reachable_only:
        occupancy = occupancy[reachable_latents(env, h)]
    if occupancy.size == 0:
        return 0.0
    return float(occupancy.min())
