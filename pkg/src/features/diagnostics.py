"""
Model-error diagnostics against ground truth.

Everything here reads true environment quantities and is only used to
measure learners, never to drive them.
"""
from __future__ import annotations

import numpy as np

from src.constants import DEFAULTS, EMISSION
from src.errors import DimensionMismatch, SpanCoefficientsMissing, UnsupportedEmissionMode
from src.features.decoders import FeatureMap
from src.features.models import EmissionEmbedding, LinearMdpModel
from src.mdp.block_mdp import BlockMdp
from src.mdp.dynamic_programming import observation_occupancy
from src.mdp.policies import Policy, TabularPolicy


def _require_decodable(env: BlockMdp) -> None:
    if env.emission_mode != EMISSION.DECODABLE:
        raise UnsupportedEmissionMode(f"exact kernel comparison needs decodable emissions, {env.name} is {env.emission_mode}")


def kernel_tv(kernel: np.ndarray, env: BlockMdp, policy: Policy, h: int) -> float:
    """Occupancy-weighted total variation between ``kernel`` and the true step-``h`` kernel."""
    gap = 0.5 * np.abs(kernel - env.kernel(h)).sum(axis=2)
    return float(np.sum(observation_occupancy(env, policy, h) * gap))


def model_tv_error(model: LinearMdpModel, env: BlockMdp, policy: Policy) -> np.ndarray:
    """``E_{d^pi_h} TV(P_hat_h(s, a), P*_h(s, a))`` for every ``h < H-1``.

    Raises:
        UnsupportedEmissionMode: In noisy mode.
        DimensionMismatch: If the model and the environment disagree.
    """
    _require_decodable(env)
    if model.horizon != env.horizon or model.num_actions != env.num_actions:
        raise DimensionMismatch("model does not match the environment")
    return np.array([kernel_tv(model.kernel(h), env, policy, h) for h in range(env.horizon - 1)])


def target_span_model(
    mu_hats: list[EmissionEmbedding],
    span_coefficients: list[np.ndarray] | None,
) -> EmissionEmbedding:
    """Combine per-task embeddings with recorded span coefficients.

    ``mu_tilde_h(s') = sum_k alpha_{k;h}(s') mu_hat_{k;h}(s')``.

    Raises:
        SpanCoefficientsMissing: If no coefficients were recorded.
        DimensionMismatch: If the embeddings and coefficients disagree.
    """
    if span_coefficients is None:
        raise SpanCoefficientsMissing("this suite carries no span coefficients")
    if len(mu_hats) != span_coefficients[0].shape[0]:
        raise DimensionMismatch(f"{len(mu_hats)} embeddings for {span_coefficients[0].shape[0]} coefficient rows")
    matrices = []
    for h, alpha in enumerate(span_coefficients):
        stacked = np.stack([mu.at(h) for mu in mu_hats])
        if stacked.shape[:2] != alpha.shape:
            raise DimensionMismatch(f"embeddings at step {h} do not match the coefficients")
        matrices.append(np.einsum("ko,kod->od", alpha, stacked))
    return EmissionEmbedding(tuple(matrices))


def span_model_tv(
    phi: FeatureMap,
    mu_tilde: EmissionEmbedding,
    env: BlockMdp,
    rng: np.random.Generator,
    num_policies: int = DEFAULTS.SPAN_POLICIES,
) -> float:
    """Largest summed TV of ``phi^T mu_tilde`` over random tabular policies."""
    _require_decodable(env)
    kernels = [mu_tilde.kernel(phi, h) for h in range(env.horizon - 1)]
    worst = 0.0
    for _ in range(num_policies):
        policy = TabularPolicy.random(env.layout, env.num_actions, rng)
        total = sum(kernel_tv(kernels[h], env, policy, h) for h in range(env.horizon - 1))
        worst = max(worst, total)
    return float(worst)


def embedding_norm_ratio(
    embedding: EmissionEmbedding,
    rng: np.random.Generator,
    num_functions: int = 100,
) -> float:
    """Largest ``||sum_s g(s) mu_h(s)||_2 / sqrt(d)`` over ``g = 1`` and random binary ``g``."""
    worst = 0.0
    for matrix in embedding.matrices:
        scale = np.sqrt(matrix.shape[1])
        functions = np.vstack([np.ones(matrix.shape[0]), rng.integers(0, 2, size=(num_functions, matrix.shape[0]))])
        norms = np.linalg.norm(functions @ matrix, axis=1)
        worst = max(worst, float(norms.max() / scale))
    return worst


def decoder_confusion(phi: FeatureMap, env: BlockMdp, h: int) -> np.ndarray:
    """``P(label | latent)`` at step ``h``, shape ``(Z_h, L_h)``."""
    return env.group_emission(h) @ phi.decoders[h].one_hot()
