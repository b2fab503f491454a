"""
Cross-sampled and on-policy transition datasets.
"""
from __future__ import annotations

import numpy as np

from src.constants import DEFAULTS, SAMPLING
from src.errors import InvalidParameter, MismatchedTasks
from src.explore.eps import ExploratoryPolicy
from src.features.datasets import TransitionDataset
from src.mdp.access import EnvHandle
from src.mdp.episodes import roll_in
from src.mdp.policies import MarkovPolicy, Policy


def as_policy(policy: Policy | ExploratoryPolicy) -> Policy:
    return policy.mixture if isinstance(policy, ExploratoryPolicy) else policy


def _roll_in_action(
    handle: EnvHandle,
    actor: MarkovPolicy,
    h: int,
    rng: np.random.Generator,
    uniform_fraction: float,
) -> tuple[int, int]:
    """Roll ``actor`` to step ``h`` and pick its action there, uniform with probability ``uniform_fraction``."""
    obs = roll_in(handle, actor, h, rng)
    if rng.random() < uniform_fraction:
        return obs, int(rng.integers(handle.num_actions))
    return obs, actor.act(h, obs, rng)


def cross_sample(
    handles: list[EnvHandle],
    policies: list[Policy | ExploratoryPolicy],
    i: int,
    j: int,
    h: int,
    n: int,
    rng: np.random.Generator,
    uniform_fraction: float = DEFAULTS.ROLL_IN_UNIFORM_FRACTION,
) -> TransitionDataset:
    """Draw ``n`` tuples of ``D_{ij;h}``.

    A state reached by task ``i``'s policy at ``h-1`` is planted into task
    ``j`` for one transition; a uniform action then moves it through task
    ``i``. At ``h = 0`` the planted state is a fresh start of task ``j``.

    Args:
        handles: Access to every source task.
        policies: Exploratory policy of every source task.
        i: Task generating the roll-in and the final transition.
        j: Task generating the planted state.
        h: Step of the final transition, ``0 <= h < H-1``.
        n: Number of tuples.
        rng: Sampling stream.
        uniform_fraction: Probability of replacing the roll-in's last action by a uniform one.

    Returns:
        A cross dataset tagged ``(i, j)``.

    Raises:
        MismatchedTasks: If ``i`` or ``j`` is not a task index.
        UnknownObservation: If a planted state cannot be decoded by task ``j``.
    """
    K = len(handles)
    if not (0 <= i < K and 0 <= j < K) or len(policies) != K:
        raise MismatchedTasks(f"task pair ({i}, {j}) outside {K} tasks")
    source, planter = handles[i], handles[j]
    if h < 0 or h >= source.horizon - 1:
        raise InvalidParameter(f"no transition leaves step {h}")
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    policy = as_policy(policies[i])
    A = source.num_actions
    rows = np.empty((n, 3), dtype=np.int64)
    for t in range(n):
        if h == 0:
            planter.begin_episode()
            s = planter.reset(rng)
        else:
            source.begin_episode()
            actor = policy.draw(rng)
            s_back, a_back = _roll_in_action(source, actor, h - 1, rng, uniform_fraction)
            if i == j:
                s = source.step(h - 1, s_back, a_back, rng)
            else:
                s = planter.generative_step(h - 1, s_back, a_back, rng)
        a = int(rng.integers(A))
        rows[t] = (s, a, source.generative_step(h, s, a, rng))
    return TransitionDataset(task_pair=(i, j), tuples={h: rows}, mode=SAMPLING.CROSS)


def on_policy_sample(
    handle: EnvHandle,
    policy: Policy | ExploratoryPolicy,
    k: int,
    h: int,
    n: int,
    rng: np.random.Generator,
    uniform_fraction: float = DEFAULTS.ROLL_IN_UNIFORM_FRACTION,
) -> TransitionDataset:
    """Draw ``n`` online ``(s_h, a_h, s_{h+1})`` tuples from ``policy`` in task ``k``."""
    if h < 0 or h >= handle.horizon - 1:
        raise InvalidParameter(f"no transition leaves step {h}")
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    mixture = as_policy(policy)
    rows = np.empty((n, 3), dtype=np.int64)
    for t in range(n):
        handle.begin_episode()
        s, a = _roll_in_action(handle, mixture.draw(rng), h, rng, uniform_fraction)
        rows[t] = (s, a, handle.step(h, s, a, rng))
    return TransitionDataset(task_pair=(k, k), tuples={h: rows}, mode=SAMPLING.ON_POLICY)
