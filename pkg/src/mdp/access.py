"""
Accounted access to environments.

Learners only see environments through an :class:`EnvHandle`, which counts
every reset, online step and generative query and can be revoked once a
pipeline stage no longer owns the environment.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Protocol

import numpy as np

from src.constants import LOGGER_NAME
from src.errors import AccessRevoked, InvalidParameter
from src.mdp.block_mdp import BlockMdp
from src.mdp.layout import ObservationLayout

logger = logging.getLogger(LOGGER_NAME)


class World(Protocol):
    """Anything an agent can act in: a true environment or a learned model."""

    horizon: int
    num_actions: int
    layout: ObservationLayout

    def begin_episode(self) -> None: ...

    def reset(self, rng: np.random.Generator) -> int: ...

    def step(self, h: int, obs: int, action: int, rng: np.random.Generator) -> int: ...

    def generative_step(self, h: int, obs: int, action: int, rng: np.random.Generator) -> int: ...


@dataclass
class AccessCounter:
    """Counts of environment interactions."""
    episodes: int = 0
    resets: int = 0
    steps: int = 0
    generative: int = 0

    def snapshot(self) -> "AccessCounter":
        return AccessCounter(**asdict(self))

    def merged(self, other: "AccessCounter") -> "AccessCounter":
        return AccessCounter(
            episodes=self.episodes + other.episodes,
            resets=self.resets + other.resets,
            steps=self.steps + other.steps,
            generative=self.generative + other.generative,
        )

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


class EnvHandle:
    """Counted, revocable access to one environment.

    Online steps must continue the episode started by the last :meth:`reset`;
    generative queries may start from any observation.
    """

    def __init__(self, env: BlockMdp, name: str | None = None) -> None:
        self.env = env
        self.name = name or env.name
        self.counter = AccessCounter()
        self._revoked = False
        self._cursor: tuple[int, int] | None = None

    @property
    def horizon(self) -> int:
        return self.env.horizon

    @property
    def num_actions(self) -> int:
        return self.env.num_actions

    @property
    def layout(self) -> ObservationLayout:
        return self.env.layout

    @property
    def revoked(self) -> bool:
        return self._revoked

    def _check(self) -> None:
        if self._revoked:
            raise AccessRevoked(f"access to {self.name} has been revoked")

    def revoke(self) -> None:
        """Withdraw access; every later call raises :class:`AccessRevoked`."""
        self._revoked = True
        logger.debug(f"Revoked access to {self.name}")

    def begin_episode(self) -> None:
        self._check()
        self.counter.episodes += 1

    def reset(self, rng: np.random.Generator) -> int:
        self._check()
        self.counter.resets += 1
        obs = self.env.reset(rng)
        self._cursor = (0, obs)
        return obs

    def step(self, h: int, obs: int, action: int, rng: np.random.Generator) -> int:
        """Take an online step from the current state of the episode."""
        self._check()
        if self._cursor != (h, obs):
            raise InvalidParameter(f"online step at ({h}, {obs}) does not continue the current episode")
        self.counter.steps += 1
        next_obs = self.env.step(h, obs, action, rng)
        self._cursor = (h + 1, next_obs)
        return next_obs

    def generative_step(self, h: int, obs: int, action: int, rng: np.random.Generator) -> int:
        """Query ``P_h(. | s, a)`` at an arbitrary observation."""
        self._check()
        self.counter.generative += 1
        return self.env.generative_step(h, obs, action, rng)
