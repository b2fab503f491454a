"""
LSVI-UCB over one-hot decoder features.

Features only depend on an observation's codeword group, so the regression
sums are kept as group-level counts and recomputed against the current value
estimate in every backward pass.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from src.constants import DEFAULTS, LOGGER_NAME
from src.errors import DimensionMismatch, InvalidParameter
from src.features.decoders import FeatureMap
from src.lsvi.bonus import elliptical_bonuses, rank_one_update
from src.lsvi.trace import RegretTrace, SolveCriterion
from src.mdp.access import World
from src.mdp.policies import GreedyPolicy, MixturePolicy, Policy

logger = logging.getLogger(LOGGER_NAME)


@dataclass
class LsviState:
    """Regression state of every step.

    Attributes:
        lambda_inv: ``Lambda_h^-1``; ``Lambda_h`` starts at the identity.
        visits: ``(G_h, A)`` counts of logged ``(group, action)`` pairs.
        transitions: ``(G_h, A, G_{h+1})`` counts of logged transitions, ``h < H-1``.
        weights: Latest regression weights ``w_h``.
        beta: Bonus scale.
        clip: Value clip level ``M_V``.
        episode: Number of completed episodes.
    """
    phi: FeatureMap
    beta: float
    clip: float
    lambda_inv: list[np.ndarray] = field(default_factory=list)
    visits: list[np.ndarray] = field(default_factory=list)
    transitions: list[np.ndarray] = field(default_factory=list)
    weights: list[np.ndarray] = field(default_factory=list)
    episode: int = 0
    pending_updates: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        layout, A = self.phi.layout, self.phi.num_actions
        H = layout.horizon
        self.lambda_inv = [np.eye(self.phi.dimension(h)) for h in range(H)]
        self.visits = [np.zeros((layout.num_groups(h), A)) for h in range(H)]
        self.transitions = [np.zeros((layout.num_groups(h), A, layout.num_groups(h + 1))) for h in range(H - 1)]
        self.weights = [np.zeros(self.phi.dimension(h)) for h in range(H)]
        self.pending_updates = [0] * H

    def covariance(self, h: int) -> np.ndarray:
        """``I + sum phi phi^T`` rebuilt from the logged visits."""
        features = self.phi.feature_tensor(h)
        return np.eye(features.shape[2]) + np.einsum("ga,gad,gae->de", self.visits[h], features, features)

    def reinvert(self, h: int) -> None:
        factor = cho_factor(self.covariance(h))
        self.lambda_inv[h] = cho_solve(factor, np.eye(self.phi.dimension(h)))
        self.pending_updates[h] = 0

    def observe(self, h: int, group: int, action: int, next_group: int | None) -> None:
        """Log one ``(s_h, a_h, s_{h+1})`` sample."""
        self.visits[h][group, action] += 1.0
        if next_group is not None:
            self.transitions[h][group, action, next_group] += 1.0
        self.lambda_inv[h] = rank_one_update(self.lambda_inv[h], self.phi.feature_tensor(h)[group, action])
        self.pending_updates[h] += 1
        if self.pending_updates[h] >= DEFAULTS.REINVERT_EVERY:
            self.reinvert(h)
            logger.debug(f"Re-inverted the step-{h} covariance after {DEFAULTS.REINVERT_EVERY} updates")

    def bonuses(self, h: int) -> np.ndarray:
        """Unscaled bonus of every ``(group, action)``."""
        return elliptical_bonuses(self.phi.feature_tensor(h), self.lambda_inv[h])

    def backward_pass(self, reward: list[np.ndarray]) -> tuple[list[np.ndarray], float, int]:
        """Compute optimistic Q tables for every step.

        Returns:
            ``(q_tables, max_bonus, clip_hits)``.
        """
        H = self.phi.horizon
        q_tables: list[np.ndarray] = [np.zeros(0)] * H
        value_next = np.zeros(0)
        max_bonus, clip_hits = 0.0, 0
        for h in reversed(range(H)):
            features = self.phi.feature_tensor(h)
            if h < H - 1:
                design = np.einsum("gad,gaj,j->d", features, self.transitions[h], value_next)
                self.weights[h] = self.lambda_inv[h] @ design
            else:
                self.weights[h] = np.zeros(features.shape[2])
            bonus = self.bonuses(h)
            max_bonus = max(max_bonus, float(bonus.max()))
            q = features @ self.weights[h] + reward[h] + self.beta * bonus
            best = q.max(axis=1)
            clip_hits += int(np.count_nonzero(best > self.clip))
            value_next = np.minimum(best, self.clip)
            q_tables[h] = q
        return q_tables, max_bonus, clip_hits


def _check_inputs(world: World, phi: FeatureMap, reward: list[np.ndarray]) -> None:
    if phi.horizon != world.horizon or phi.num_actions != world.num_actions:
        raise DimensionMismatch("features do not match the world's horizon or action count")
    for h in range(world.horizon):
        if phi.layout.num_groups(h) != world.layout.num_groups(h):
            raise DimensionMismatch(f"features and world disagree on the codeword groups of step {h}")
    if len(reward) != world.horizon:
        raise DimensionMismatch(f"reward covers {len(reward)} steps, expected {world.horizon}")
    for h, r in enumerate(reward):
        if np.shape(r) != (world.layout.num_groups(h), world.num_actions):
            raise DimensionMismatch(f"reward at step {h} must be a (groups, actions) table")


def lsvi_ucb(
    world: World,
    phi: FeatureMap,
    reward: list[np.ndarray],
    num_episodes: int,
    beta: float,
    uniform_actions: bool = False,
    rng: np.random.Generator | None = None,
    clip: float | None = None,
    evaluator: Callable[[Policy], float] | None = None,
    solve: SolveCriterion | None = None,
    stop_when_solved: bool = False,
) -> tuple[MixturePolicy, RegretTrace]:
    """Run LSVI-UCB for ``num_episodes`` episodes.

    Args:
        world: True environment handle or learned model to act in.
        phi: Features of every step.
        reward: Known mean reward per ``(group, action)`` of every step.
        num_episodes: Episode budget N.
        beta: Bonus scale.
        uniform_actions: Log fresh uniform actions (with a generative next
            state) instead of the executed ones.
        rng: Random stream for the world and the uniform actions.
        clip: Value clip ``M_V``; defaults to the horizon.
        evaluator: Exact value of a policy, recorded per episode.
        solve: Solve criterion checked every ``solve.interval`` episodes.
        stop_when_solved: End the run once ``solve`` reports success.

    Returns:
        The uniform mixture of the executed greedy policies and the trace.

    Raises:
        InvalidParameter: If ``beta < 0`` or ``num_episodes < 1``.
        DimensionMismatch: If features, reward and world disagree.
    """
    if beta < 0:
        raise InvalidParameter(f"beta must be non-negative, got {beta}")
    if num_episodes < 1:
        raise InvalidParameter(f"num_episodes must be at least 1, got {num_episodes}")
    _check_inputs(world, phi, reward)
    rng = rng if rng is not None else np.random.default_rng()
    H, A, layout = world.horizon, world.num_actions, world.layout
    reward = [np.asarray(r, dtype=float) for r in reward]
    state = LsviState(phi=phi, beta=beta, clip=float(H if clip is None else clip))
    trace = RegretTrace(optimum=solve.optimum if solve is not None else math.nan)
    policies: list[GreedyPolicy] = []

    for e in range(num_episodes):
        q_tables, max_bonus, clip_hits = state.backward_pass(reward)
        policy = GreedyPolicy(layout, A, q_tables)
        policies.append(policy)
        trace.record(evaluator(policy) if evaluator is not None else math.nan, max_bonus, clip_hits)

        world.begin_episode()
        obs = world.reset(rng)
        for h in range(H):
            action = policy.act(h, obs, rng)
            group = layout.group(h, obs)
            next_obs = world.step(h, obs, action, rng) if h < H - 1 else None
            if uniform_actions:
                logged = int(rng.integers(A))
                logged_next = world.generative_step(h, obs, logged, rng) if h < H - 1 else None
            else:
                logged, logged_next = action, next_obs
            next_group = layout.group(h + 1, logged_next) if logged_next is not None else None
            state.observe(h, group, logged, next_group)
            obs = next_obs
        state.episode = e + 1

        if solve is not None and solve.due(e + 1):
            solve.check(e + 1, policy)
            if solve.solved and stop_when_solved:
                break

    if solve is not None:
        trace.episodes_to_solve = solve.solved_at
        trace.checkpoints = list(solve.checkpoints)
    logger.debug(f"LSVI-UCB ran {state.episode} episodes (beta={beta:.3g}, solved={trace.solved})")
    return MixturePolicy(policies), trace
