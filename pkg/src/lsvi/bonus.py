"""
Elliptical bonuses, covariance maintenance and bonus scales.
"""
from __future__ import annotations

import math

import numpy as np

from src.errors import InvalidParameter


def elliptical_bonus(phi_sa: np.ndarray, lambda_inv: np.ndarray) -> float:
    """``sqrt(phi^T Lambda^-1 phi)``."""
    phi_sa = np.asarray(phi_sa, dtype=float)
    return float(np.sqrt(max(phi_sa @ lambda_inv @ phi_sa, 0.0)))


def elliptical_bonuses(features: np.ndarray, lambda_inv: np.ndarray) -> np.ndarray:
    """Bonus of every feature vector along the last axis of ``features``."""
    quadratic = np.einsum("...d,de,...e->...", features, lambda_inv, features)
    return np.sqrt(np.maximum(quadratic, 0.0))


def rank_one_update(lambda_inv: np.ndarray, phi_sa: np.ndarray) -> np.ndarray:
    """Inverse of ``Lambda + phi phi^T`` from ``Lambda^-1`` (Sherman-Morrison).

    The result is symmetrized to keep round-off from accumulating.
    """
    phi_sa = np.asarray(phi_sa, dtype=float)
    projected = lambda_inv @ phi_sa
    denominator = 1.0 + phi_sa @ projected
    updated = lambda_inv - np.outer(projected, projected) / denominator
    return 0.5 * (updated + updated.T)


def _check_delta(delta: float) -> None:
    if not 0 < delta < 1:
        raise InvalidParameter(f"delta must lie in (0, 1), got {delta}")


def beta_deployment(dimension: int, horizon: int, num_episodes: float, delta: float, alpha_bar: float) -> float:
    """Deployment bonus scale ``H sqrt(d) + alpha_bar d H sqrt(log(d H T / delta))``."""
    _check_delta(delta)
    if num_episodes <= 0 or dimension < 1 or horizon < 1:
        raise InvalidParameter("dimension, horizon and episode count must be positive")
    log_term = math.log(dimension * horizon * num_episodes / delta)
    return horizon * math.sqrt(dimension) + alpha_bar * dimension * horizon * math.sqrt(max(log_term, 0.0))


def beta_eps(dimension: int, horizon: int, num_episodes: float, delta: float) -> float:
    """Bonus scale of the in-model exploration run, ``d H sqrt(log(d H N / delta))``."""
    _check_delta(delta)
    if num_episodes <= 0 or dimension < 1 or horizon < 1:
        raise InvalidParameter("dimension, horizon and episode count must be positive")
    log_term = math.log(dimension * horizon * num_episodes / delta)
    return dimension * horizon * math.sqrt(max(log_term, 0.0))
