"""
Reward-free model learning with optimistic exploration bonuses.

Each episode collects one uniform-action transition per step from the
current policy's roll-in, plus a one-step-back transition reached through
an extra uniform action, refits the count model and plans against the
elliptical bonus of the learned features.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from src.constants import DEFAULTS, LOGGER_NAME
from src.errors import InvalidParameter
from src.explore.planning import plan_in_model
from src.features.datasets import TransitionCounts, TransitionDataset
from src.features.decoders import FeatureMap, HypothesisClass
from src.features.mle import fit_counts, fit_task_models, mle_bound_zeta
from src.features.models import LinearMdpModel
from src.mdp.access import EnvHandle
from src.mdp.episodes import roll_in
from src.mdp.policies import MarkovPolicy, UniformPolicy

logger = logging.getLogger(LOGGER_NAME)


@dataclass
class RepUcbRun:
    """Record of one reward-free run; episodes are numbered from 0.

    Attributes:
        values: Planned optimistic value ``V_n`` of every episode.
        alphas: Bonus scale ``alpha_n`` of every episode.
        lambdas: Regularizer ``lambda_n`` of every episode.
        decoder_indices: Decoder candidate indices in use after every episode.
        dataset_sizes: Tuples per step in the on-policy dataset after every episode.
        max_bonus: Largest bonus of every episode.
        selected: Index ``n_hat`` of the returned model.
    """
    values: list[float] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    lambdas: list[float] = field(default_factory=list)
    decoder_indices: list[list[int]] = field(default_factory=list)
    dataset_sizes: list[int] = field(default_factory=list)
    max_bonus: list[float] = field(default_factory=list)
    selected: int = -1
    counts: TransitionCounts | None = None

    @property
    def num_episodes(self) -> int:
        return len(self.values)

    def to_document(self) -> dict[str, Any]:
        return {
            "values": self.values,
            "alphas": self.alphas,
            "lambdas": self.lambdas,
            "decoder_indices": self.decoder_indices,
            "selected": self.selected,
            "max_bonus": self.max_bonus,
        }


def bonus_scales(
    n: int,
    dimension: int,
    horizon: int,
    num_actions: int,
    size_phi: int,
    delta: float,
    lambda_scale: float = 1.0,
    alpha_scale: float = 1.0,
) -> tuple[float, float]:
    """``(alpha_n, lambda_n)`` with unit leading constants times the given scales.

    ``lambda_n = d log((n+1) H |Phi| / delta)`` and
    ``alpha_n = sqrt((n+1) A^2 zeta_n + lambda_n d)`` with ``n+1`` samples.
    """
    samples = n + 1
    lambda_n = lambda_scale * dimension * math.log(samples * horizon * size_phi / delta)
    zeta = mle_bound_zeta(samples, size_phi, size_phi, 1, delta)
    alpha_n = alpha_scale * math.sqrt(samples * num_actions ** 2 * zeta + lambda_n * dimension)
    return alpha_n, lambda_n


def bonus_tables(phi: FeatureMap, visits: list[np.ndarray], alpha: float, lam: float) -> list[np.ndarray]:
    """``alpha ||phi(g, a)||_{Sigma^-1}`` with ``Sigma = sum phi phi^T + lambda I`` per step."""
    tables = []
    for h in range(phi.horizon):
        features = phi.feature_tensor(h)
        sigma = lam * np.eye(features.shape[2]) + np.einsum("ga,gad,gae->de", visits[h], features, features)
        solved = cho_solve(cho_factor(sigma), features.reshape(-1, features.shape[2]).T).T
        quadratic = np.einsum("nd,nd->n", features.reshape(-1, features.shape[2]), solved)
        tables.append(alpha * np.sqrt(np.maximum(quadratic, 0.0)).reshape(features.shape[:2]))
    return tables


def _collect(
    handle: EnvHandle,
    policy: MarkovPolicy,
    rng: np.random.Generator,
) -> tuple[dict[int, list[int]], dict[int, list[int]]]:
    """One episode of data: ``D_h`` for every ``h`` and ``D'_h`` for ``h >= 1``."""
    H, A = handle.horizon, handle.num_actions
    on_policy: dict[int, list[int]] = {}
    shifted: dict[int, list[int]] = {}
    for h in range(H - 1):
        s = roll_in(handle, policy, h, rng)
        a = int(rng.integers(A))
        on_policy[h] = [s, a, handle.step(h, s, a, rng)]
        if h == 0:
            continue
        s_back = roll_in(handle, policy, h - 1, rng)
        a_back = int(rng.integers(A))
        s_mid = handle.step(h - 1, s_back, a_back, rng)
        a_mid = int(rng.integers(A))
        shifted[h] = [s_mid, a_mid, handle.step(h, s_mid, a_mid, rng)]
    return on_policy, shifted


def reward_free_rep_ucb(
    handle: EnvHandle,
    hclass: HypothesisClass,
    num_episodes: int,
    rng: np.random.Generator,
    delta: float = 0.1,
    lambda_scale: float = 1.0,
    alpha_scale: float = 1.0,
    reselect_every: int | None = None,
    smoothing: float = DEFAULTS.SMOOTHING,
) -> tuple[LinearMdpModel, RepUcbRun]:
    """Learn a model of ``handle``'s environment without a reward.

    Args:
        handle: Online access to the environment.
        hclass: Decoder candidates.
        num_episodes: Episode budget N (at least 2).
        rng: Learner stream.
        delta: Failure probability used in the bonus scales.
        lambda_scale: Multiplier on ``lambda_n``.
        alpha_scale: Multiplier on ``alpha_n``.
        reselect_every: Episodes between full decoder re-selections;
            defaults to ``ceil(N / 20)``.
        smoothing: Count smoothing of the fitted models.

    Returns:
        The model of episode ``n_hat = argmin_{n >= N/2} V_n`` and the run record.

    Raises:
        PlanningSupportEmpty: If a learned model has no observed support at some step.
    """
    if num_episodes < 2:
        raise InvalidParameter(f"reward-free model learning needs at least 2 episodes, got {num_episodes}")
    if not 0 < delta < 1:
        raise InvalidParameter(f"delta must lie in (0, 1), got {delta}")
    reselect_every = reselect_every or math.ceil(num_episodes / 20)
    H, A, layout = handle.horizon, handle.num_actions, handle.layout
    counts = TransitionCounts(layout, A, 1)
    visits = [np.zeros((layout.num_groups(h), A)) for h in range(H)]
    policy: MarkovPolicy = UniformPolicy(layout, A)
    run = RepUcbRun(counts=counts)
    first_candidate = math.ceil(num_episodes / 2)
    best_model: LinearMdpModel | None = None
    best_value = math.inf
    selections = None

    for n in range(num_episodes):
        handle.begin_episode()
        on_policy, shifted = _collect(handle, policy, rng)
        counts.add(TransitionDataset((0, 0), {h: [row] for h, row in on_policy.items()}))
        if shifted:
            counts.add(TransitionDataset((0, 0), {h: [row] for h, row in shifted.items()}))
        for h, (s, a, _) in on_policy.items():
            visits[h][layout.group(h, s), a] += 1.0

        if selections is None or n % reselect_every == 0 or n == num_episodes - 1:
            fit = fit_counts(counts, hclass, smoothing)
            selections = fit.selections
            model = fit.models[0]
            logger.debug(f"Episode {n}: decoder re-selection picked {fit.indices}")
        else:
            phi = hclass.feature_map([s.index for s in selections])
            model = fit_task_models(counts, phi, selections, smoothing)[0]

        alpha, lam = bonus_scales(n, model.phi.max_dimension, H, A, hclass.size_phi, delta, lambda_scale, alpha_scale)
        bonus = bonus_tables(model.phi, visits, alpha, lam)
        plan = plan_in_model(model, bonus)
        policy = plan.policy

        run.values.append(plan.value)
        run.alphas.append(alpha)
        run.lambdas.append(lam)
        run.decoder_indices.append([s.index for s in selections])
        run.dataset_sizes.append(n + 1)
        run.max_bonus.append(float(max(b.max() for b in bonus)))
        if n >= first_candidate and plan.value < best_value:
            best_value, best_model, run.selected = plan.value, model, n

    if best_model is None:
        raise InvalidParameter("no episode qualified for model selection")
    logger.info(
        f"Reward-free model learning on {handle.name}: {num_episodes} episodes, "
        f"selected episode {run.selected} with value {best_value:.4g}"
    )
    return best_model, run
