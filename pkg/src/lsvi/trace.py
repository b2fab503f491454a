"""
Regret accounting and the "solved" criterion for deployment runs.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.constants import DEFAULTS, LOGGER_NAME
from src.errors import InvalidParameter
from src.mdp.block_mdp import BlockMdp
from src.mdp.episodes import monte_carlo_return
from src.mdp.policies import Policy

logger = logging.getLogger(LOGGER_NAME)

TRACE_COLUMNS = ["episode", "value", "cumulative_regret", "max_bonus", "clip_hits"]


@dataclass
class RegretTrace:
    """Per-episode values of the executed policies against the optimum.

    Attributes:
        optimum: Optimal value ``V*`` of the deployment task.
        values: Exact value of each episode's policy; NaN when no evaluator ran.
        max_bonus: Largest unscaled bonus seen in each episode's backward pass.
        clip_hits: Number of ``(h, group)`` cells whose value was clipped, per episode.
        episodes_to_solve: Episode count at which the solve streak began, or ``inf``.
        checkpoints: ``(episodes, mean evaluation return)`` of every solve check.
    """
    optimum: float = math.nan
    values: list[float] = field(default_factory=list)
    max_bonus: list[float] = field(default_factory=list)
    clip_hits: list[int] = field(default_factory=list)
    episodes_to_solve: float = math.inf
    checkpoints: list[tuple[int, float]] = field(default_factory=list)

    def record(self, value: float, max_bonus: float, clip_hits: int) -> None:
        self.values.append(float(value))
        self.max_bonus.append(float(max_bonus))
        self.clip_hits.append(int(clip_hits))

    @property
    def num_episodes(self) -> int:
        return len(self.values)

    @property
    def solved(self) -> bool:
        return math.isfinite(self.episodes_to_solve)

    def gaps(self) -> np.ndarray:
        return self.optimum - np.asarray(self.values, dtype=float)

    def cumulative_regret(self) -> np.ndarray:
        return np.cumsum(self.gaps())

    def regret_at(self, episodes: int) -> float:
        """Cumulative regret after the first ``episodes`` episodes."""
        if episodes < 1 or episodes > self.num_episodes:
            raise InvalidParameter(f"trace holds {self.num_episodes} episodes, asked for {episodes}")
        return float(self.cumulative_regret()[episodes - 1])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "episode": np.arange(1, self.num_episodes + 1),
            "value": self.values,
            "cumulative_regret": self.cumulative_regret(),
            "max_bonus": self.max_bonus,
            "clip_hits": self.clip_hits,
        }, columns=TRACE_COLUMNS)

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)

    def summary(self) -> dict[str, float | int]:
        regret = self.cumulative_regret()
        return {
            "optimum": self.optimum,
            "episodes": self.num_episodes,
            "episodes_to_solve": self.episodes_to_solve,
            "final_regret": float(regret[-1]) if regret.size else 0.0,
        }


@dataclass
class SolveCriterion:
    """Optimal mean return at ``consecutive`` checkpoints spaced ``interval`` episodes apart.

    Evaluation episodes run on the raw environment with their own stream and
    are not charged to any access counter.
    """
    env: BlockMdp
    optimum: float
    rng: np.random.Generator
    interval: int = DEFAULTS.SOLVE_INTERVAL
    runs: int = DEFAULTS.SOLVE_RUNS
    consecutive: int = DEFAULTS.SOLVE_CONSECUTIVE
    tolerance: float = DEFAULTS.TIE_TOLERANCE
    offset: int = 0
    streak: int = 0
    streak_start: int = 0
    solved_at: float = math.inf
    checkpoints: list[tuple[int, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.interval < 1 or self.runs < 1 or self.consecutive < 1:
            raise InvalidParameter("solve interval, runs and streak length must be positive")

    @property
    def solved(self) -> bool:
        return math.isfinite(self.solved_at)

    def due(self, episodes: int) -> bool:
        return episodes % self.interval == 0

    def check(self, episodes: int, policy: Policy) -> bool:
        """Evaluate ``policy`` after ``episodes`` episodes and update the streak."""
        value = monte_carlo_return(self.env, policy, self.runs, self.rng)
        counted = episodes + self.offset
        self.checkpoints.append((counted, value))
        if value >= self.optimum - self.tolerance:
            if self.streak == 0:
                self.streak_start = counted
            self.streak += 1
            if self.streak >= self.consecutive and not self.solved:
                self.solved_at = float(self.streak_start)
                logger.debug(f"Solve streak complete at {counted} episodes (started at {self.streak_start})")
        else:
            self.streak = 0
        logger.debug(f"Checkpoint at {counted} episodes: mean return {value:.4f}")
        return self.solved
