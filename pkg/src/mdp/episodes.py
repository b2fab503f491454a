"""
Episode sampling on Block MDPs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from src.errors import InvalidParameter
from src.mdp.block_mdp import BlockMdp
from src.mdp.policies import Policy

if TYPE_CHECKING:
    from src.mdp.access import World


@dataclass(frozen=True)
class TrajectoryStep:
    """One decision of an episode."""
    h: int
    observation: int
    action: int
    reward: float
    latent: int | None = None


@dataclass
class Trajectory:
    """Steps of one episode; latents are only filled in diagnostics mode."""
    steps: list[TrajectoryStep] = field(default_factory=list)
    terminal: bool = False

    @property
    def total_reward(self) -> float:
        return float(sum(step.reward for step in self.steps))

    def __len__(self) -> int:
        return len(self.steps)


def sample_episode(
    env: BlockMdp,
    policy: Policy,
    rng: np.random.Generator,
    diagnostics: bool = False,
) -> Trajectory:
    """Draw one episode from the chain induced by ``env`` and ``policy``.

    Args:
        env: Environment to simulate.
        policy: Policy; mixtures draw their component once per episode.
        rng: Random stream.
        diagnostics: Record the latent state of every step.

    Returns:
        A terminal trajectory of exactly ``H`` steps.
    """
    if policy.layout.horizon != env.horizon:
        raise InvalidParameter("policy horizon does not match the environment")
    actor = policy.draw(rng)
    trajectory = Trajectory()
    z = env.initial_latent(rng)
    obs = env.emit(0, z, rng)
    for h in range(env.horizon):
        action = actor.act(h, obs, rng)
        reward = env.draw_reward(h, z, action, rng)
        trajectory.steps.append(
            TrajectoryStep(h=h, observation=obs, action=action, reward=reward, latent=z if diagnostics else None)
        )
        if h < env.horizon - 1:
            z = env.next_latent(h, z, action, rng)
            obs = env.emit(h + 1, z, rng)
    trajectory.terminal = True
    return trajectory


def generative_step(env: BlockMdp, h: int, obs: int, action: int, rng: np.random.Generator) -> int:
    """Sample ``s' ~ P_h(. | s, a)`` with generative access to ``env``."""
    return env.generative_step(h, obs, action, rng)


def monte_carlo_return(env: BlockMdp, policy: Policy, runs: int, rng: np.random.Generator) -> float:
    """Mean realized return of ``policy`` over ``runs`` sampled episodes."""
    if runs < 1:
        raise InvalidParameter(f"runs must be positive, got {runs}")
    return float(np.mean([sample_episode(env, policy, rng).total_reward for _ in range(runs)]))


def roll_in(world: "World", policy: Policy, h: int, rng: np.random.Generator) -> int:
    """Reset ``world`` and follow ``policy`` online until step ``h``.

    Mixtures draw one component for the whole roll-in. The caller decides
    whether the roll-in counts as an episode.

    Returns:
        The observation reached at step ``h``.
    """
    if h < 0 or h >= world.horizon:
        raise InvalidParameter(f"step {h} outside horizon {world.horizon}")
    actor = policy.draw(rng)
    obs = world.reset(rng)
    for step in range(h):
        obs = world.step(step, obs, actor.act(step, obs, rng), rng)
    return obs
