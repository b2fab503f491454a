"""
Markov policies over codeword observations.

Every policy here acts through the observation layout: observations in the
same codeword group are treated identically, so a policy is fully described
by one action distribution per ``(h, group)``.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

import numpy as np

from src.errors import InvalidParameter, InvalidWeights
from src.mdp.layout import ObservationLayout
from src.mdp.sampling import cumulative, draw_index

if TYPE_CHECKING:
    from src.mdp.block_mdp import BlockMdp


class Policy(ABC):
    """A distribution over Markov policies, drawn once per episode."""

    layout: ObservationLayout
    num_actions: int

    @abstractmethod
    def components(self) -> list[tuple[float, "MarkovPolicy"]]:
        """Return ``(weight, policy)`` pairs with identical policies merged."""

    @abstractmethod
    def draw(self, rng: np.random.Generator) -> "MarkovPolicy":
        """Draw the Markov policy used for one episode."""


class MarkovPolicy(Policy):
    """A single Markov policy."""

    def __init__(self, layout: ObservationLayout, num_actions: int) -> None:
        if num_actions < 1:
            raise InvalidParameter(f"num_actions must be positive, got {num_actions}")
        self.layout = layout
        self.num_actions = num_actions

    def components(self) -> list[tuple[float, "MarkovPolicy"]]:
        return [(1.0, self)]

    def draw(self, rng: np.random.Generator) -> "MarkovPolicy":
        return self

    @property
    def horizon(self) -> int:
        return self.layout.horizon

    @abstractmethod
    def group_action_probs(self, h: int) -> np.ndarray:
        """Action distribution per codeword group at step ``h``, shape ``(G_h, A)``."""

    @abstractmethod
    def key(self) -> bytes:
        """Identity used to merge equal policies inside a mixture."""

    def latent_action_probs(self, env: "BlockMdp", h: int) -> np.ndarray:
        """Action distribution per latent state, averaging over emitted groups."""
        return env.group_emission(h) @ self.group_action_probs(h)

    def act(self, h: int, obs: int, rng: np.random.Generator) -> int:
        """Choose an action for ``obs`` at step ``h``."""
        group = self.layout.group(h, obs)
        return draw_index(cumulative(self.group_action_probs(h)[group]), rng)


class UniformPolicy(MarkovPolicy):
    """Uniformly random actions everywhere."""

    def group_action_probs(self, h: int) -> np.ndarray:
        groups = self.layout.num_groups(h)
        return np.full((groups, self.num_actions), 1.0 / self.num_actions)

    def act(self, h: int, obs: int, rng: np.random.Generator) -> int:
        self.layout.group(h, obs)
        return int(rng.integers(self.num_actions))

    def key(self) -> bytes:
        return b"uniform"


class DeterministicPolicy(MarkovPolicy):
    """A policy given by one action per codeword group and step."""

    def __init__(self, layout: ObservationLayout, num_actions: int, actions: list[np.ndarray]) -> None:
        super().__init__(layout, num_actions)
        self.actions = [np.asarray(a, dtype=np.int64) for a in actions]
        if len(self.actions) != layout.horizon:
            raise InvalidParameter("deterministic policies need one action table per step")
        for h, table in enumerate(self.actions):
            if table.shape != (layout.num_groups(h),):
                raise InvalidParameter(f"action table {h} must cover {layout.num_groups(h)} groups")
            if table.size and (table.min() < 0 or table.max() >= num_actions):
                raise InvalidParameter(f"action table {h} holds actions outside [0, {num_actions})")

    def group_action_probs(self, h: int) -> np.ndarray:
        probs = np.zeros((self.actions[h].size, self.num_actions))
        probs[np.arange(self.actions[h].size), self.actions[h]] = 1.0
        return probs

    def act(self, h: int, obs: int, rng: np.random.Generator) -> int:
        return int(self.actions[h][self.layout.group(h, obs)])

    def key(self) -> bytes:
        return b"det:" + b"|".join(table.tobytes() for table in self.actions)


class GreedyPolicy(DeterministicPolicy):
    """Greedy policy with respect to per-step Q tables over groups.

    Ties are broken towards the lowest action index.
    """

    def __init__(self, layout: ObservationLayout, num_actions: int, q_tables: list[np.ndarray]) -> None:
        super().__init__(layout, num_actions, [np.argmax(q, axis=1) for q in q_tables])
        self.q_tables = [np.asarray(q, dtype=float) for q in q_tables]


class LatentPolicy(DeterministicPolicy):
    """Tabular policy on latent states, executed by decoding observations."""

    def __init__(self, layout: ObservationLayout, num_actions: int, latent_actions: list[np.ndarray]) -> None:
        self.latent_actions = [np.asarray(a, dtype=np.int64) for a in latent_actions]
        per_group = [
            self.latent_actions[h][layout.step(h).group_latent] for h in range(layout.horizon)
        ]
        super().__init__(layout, num_actions, per_group)


class TabularPolicy(MarkovPolicy):
    """Stochastic policy with an explicit action distribution per group."""

    def __init__(self, layout: ObservationLayout, num_actions: int, probs: list[np.ndarray]) -> None:
        super().__init__(layout, num_actions)
        self.probs = [np.asarray(p, dtype=float) for p in probs]
        for h, table in enumerate(self.probs):
            if table.shape != (layout.num_groups(h), num_actions):
                raise InvalidParameter(f"probability table {h} has shape {table.shape}")
            if table.min() < 0 or np.abs(table.sum(axis=1) - 1.0).max() > 1e-9:
                raise InvalidParameter(f"probability table {h} rows are not distributions")

    def group_action_probs(self, h: int) -> np.ndarray:
        return self.probs[h]

    def key(self) -> bytes:
        return b"tab:" + b"|".join(table.tobytes() for table in self.probs)

    @classmethod
    def random(cls, layout: ObservationLayout, num_actions: int, rng: np.random.Generator) -> "TabularPolicy":
        """Draw a policy with Dirichlet(1) action distributions per group."""
        probs = [rng.dirichlet(np.ones(num_actions), size=layout.num_groups(h)) for h in range(layout.horizon)]
        return cls(layout, num_actions, probs)


class RollInPolicy(MarkovPolicy):
    """Follow ``base`` before ``switch_step`` and act uniformly from then on."""

    def __init__(self, base: MarkovPolicy, switch_step: int) -> None:
        super().__init__(base.layout, base.num_actions)
        self.base = base
        self.switch_step = switch_step

    def group_action_probs(self, h: int) -> np.ndarray:
        if h >= self.switch_step:
            return np.full((self.layout.num_groups(h), self.num_actions), 1.0 / self.num_actions)
        return self.base.group_action_probs(h)

    def act(self, h: int, obs: int, rng: np.random.Generator) -> int:
        if h >= self.switch_step:
            self.layout.group(h, obs)
            return int(rng.integers(self.num_actions))
        return self.base.act(h, obs, rng)

    def key(self) -> bytes:
        return f"roll:{self.switch_step}:".encode() + self.base.key()


class MixturePolicy(Policy):
    """A mixture of Markov policies; one component is drawn per episode."""

    def __init__(self, policies: list[MarkovPolicy], weights: list[float] | np.ndarray | None = None) -> None:
        if not policies:
            raise InvalidWeights("a mixture needs at least one component")
        self.policies = list(policies)
        self.layout = self.policies[0].layout
        self.num_actions = self.policies[0].num_actions
        if weights is None:
            weights = np.full(len(self.policies), 1.0 / len(self.policies))
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (len(self.policies),):
            raise InvalidWeights("one weight per component is required")
        if self.weights.min() < 0 or abs(self.weights.sum() - 1.0) > 1e-9:
            raise InvalidWeights("mixture weights must form a probability vector")
        self._cdf = cumulative(self.weights)
        self._merged: list[tuple[float, MarkovPolicy]] | None = None

    def components(self) -> list[tuple[float, MarkovPolicy]]:
        if self._merged is None:
            merged: dict[bytes, list] = {}
            for weight, policy in zip(self.weights, self.policies):
                if weight == 0:
                    continue
                key = policy.key()
                if key in merged:
                    merged[key][0] += float(weight)
                else:
                    merged[key] = [float(weight), policy]
            self._merged = [(weight, policy) for weight, policy in merged.values()]
        return self._merged

    def draw(self, rng: np.random.Generator) -> MarkovPolicy:
        return self.policies[draw_index(self._cdf, rng)]

    def __len__(self) -> int:
        return len(self.policies)


def roll_in_uniform(policy: Policy, switch_step: int) -> Policy:
    """Return the roll-in-plus-uniform variant of ``policy``.

    Mixtures are converted component by component, keeping their weights.
    """
    if isinstance(policy, MixturePolicy):
        return MixturePolicy([RollInPolicy(p, switch_step) for p in policy.policies], policy.weights)
    if isinstance(policy, MarkovPolicy):
        return RollInPolicy(policy, switch_step)
    raise InvalidParameter(f"cannot roll in a {type(policy).__name__}")
