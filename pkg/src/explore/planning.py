"""
Exact planning inside a learned model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.errors import DimensionMismatch
from src.features.models import LinearMdpModel
from src.mdp.policies import GreedyPolicy


@dataclass(eq=False)
class ModelPlan:
    """Optimal greedy policy of a model, its value and the Q tables behind it."""
    policy: GreedyPolicy
    value: float
    q_tables: list[np.ndarray]


def plan_in_model(model: LinearMdpModel, rewards: list[np.ndarray], clip: float | None = None) -> ModelPlan:
    """Backward induction over codeword groups with the model's kernel.

    Next-state sums run over the groups observed in the model's data.

    Args:
        model: Learned model.
        rewards: ``(G_h, A)`` reward (or reward plus bonus) per step.
        clip: Optional cap applied to every state value.

    Returns:
        The greedy policy, ties towards the lowest action, and its model value.
    """
    H = model.horizon
    if len(rewards) != H:
        raise DimensionMismatch(f"rewards cover {len(rewards)} steps, expected {H}")
    q_tables: list[np.ndarray] = [np.zeros(0)] * H
    value_next = np.zeros(0)
    for h in reversed(range(H)):
        q = np.asarray(rewards[h], dtype=float).copy()
        if q.shape != (model.layout.num_groups(h), model.num_actions):
            raise DimensionMismatch(f"reward at step {h} must be a (groups, actions) table")
        if h < H - 1:
            q += model.planning_kernel(h) @ value_next
        q_tables[h] = q
        value_next = q.max(axis=1)
        if clip is not None:
            value_next = np.minimum(value_next, clip)
    value = float(model.initial_groups() @ value_next)
    return ModelPlan(policy=GreedyPolicy(model.layout, model.num_actions, q_tables), value=value, q_tables=q_tables)
