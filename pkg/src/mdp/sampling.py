"""
Categorical sampling helpers shared by simulators and policies.
"""
from __future__ import annotations

import numpy as np


def cumulative(probs: np.ndarray) -> np.ndarray:
    """Return row-wise CDFs whose last column is exactly 1.

    Zero-probability trailing entries keep the same CDF value as the last
    positive entry, so they are never drawn.
    """
    cdf = np.cumsum(np.asarray(probs, dtype=float), axis=-1)
    return cdf / cdf[..., -1:]


def draw_index(cdf_row: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one index from a CDF row produced by :func:`cumulative`."""
    return int(np.searchsorted(cdf_row, rng.random(), side="right"))


def draw_from(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one index from an unnormalized probability vector."""
    return draw_index(cumulative(probs), rng)
