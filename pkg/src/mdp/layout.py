"""
Observation layout shared by every task of a suite.

Observations are integer codeword ids. At each step the codewords are
partitioned into codeword groups; every group is emitted by exactly one
latent state and belongs to one observation block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.errors import DimensionMismatch, InvalidParameter, UnknownObservation


@dataclass(frozen=True, eq=False)
class StepLayout:
    """Codeword structure of a single step."""
    group_of: np.ndarray
    group_latent: np.ndarray
    group_block: np.ndarray
    num_latents: int = field(init=False)

    def __post_init__(self) -> None:
        """Normalize arrays and validate the grouping."""
        object.__setattr__(self, "group_of", np.asarray(self.group_of, dtype=np.int64))
        object.__setattr__(self, "group_latent", np.asarray(self.group_latent, dtype=np.int64))
        object.__setattr__(self, "group_block", np.asarray(self.group_block, dtype=np.int64))
        self._validate()
        object.__setattr__(self, "num_latents", int(self.group_latent.max()) + 1)

    def _validate(self) -> None:
        """Validate the step layout."""
        if self.group_of.ndim != 1 or self.group_of.size == 0:
            raise InvalidParameter("group_of must be a non-empty vector")
        if self.group_latent.shape != self.group_block.shape:
            raise DimensionMismatch("group_latent and group_block must have the same length")
        num_groups = self.group_latent.size
        if self.group_of.min() < 0 or self.group_of.max() >= num_groups:
            raise InvalidParameter("group_of refers to a group outside the layout")
        if np.bincount(self.group_of, minlength=num_groups).min() == 0:
            raise InvalidParameter("every codeword group must own at least one codeword")
        if self.group_latent.min() < 0:
            raise InvalidParameter("latent ids must be non-negative")
        if np.unique(self.group_latent).size != int(self.group_latent.max()) + 1:
            raise InvalidParameter("latent ids must be contiguous from zero")

    @property
    def num_obs(self) -> int:
        """Number of codewords at this step."""
        return int(self.group_of.size)

    @property
    def num_groups(self) -> int:
        """Number of codeword groups at this step."""
        return int(self.group_latent.size)

    @property
    def num_blocks(self) -> int:
        """Number of observation blocks at this step."""
        return int(self.group_block.max()) + 1

    def members(self, group: int) -> np.ndarray:
        """Return the codeword ids owned by ``group``."""
        return np.flatnonzero(self.group_of == group)

    def group_matrix(self) -> np.ndarray:
        """Return the (O, G) indicator matrix of codeword membership."""
        matrix = np.zeros((self.num_obs, self.num_groups))
        matrix[np.arange(self.num_obs), self.group_of] = 1.0
        return matrix


@dataclass(frozen=True, eq=False)
class ObservationLayout:
    """Per-step codeword layouts for a whole horizon."""
    steps: tuple[StepLayout, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise InvalidParameter("a layout needs at least one step")

    @property
    def horizon(self) -> int:
        return len(self.steps)

    def step(self, h: int) -> StepLayout:
        if h < 0 or h >= self.horizon:
            raise InvalidParameter(f"step {h} outside horizon {self.horizon}")
        return self.steps[h]

    def num_obs(self, h: int) -> int:
        return self.step(h).num_obs

    def num_groups(self, h: int) -> int:
        return self.step(h).num_groups

    def num_latents(self, h: int) -> int:
        return self.step(h).num_latents

    def group(self, h: int, obs: int) -> int:
        """Return the codeword group of ``obs`` at step ``h``.

        Raises:
            UnknownObservation: If ``obs`` is not a codeword of step ``h``.
        """
        step = self.step(h)
        if obs < 0 or obs >= step.num_obs:
            raise UnknownObservation(f"observation {obs} is not a codeword at step {h}")
        return int(step.group_of[obs])

    def decode(self, h: int, obs: int) -> int:
        """Return the latent state that emits ``obs`` at step ``h``."""
        return int(self.step(h).group_latent[self.group(h, obs)])

    def block(self, h: int, obs: int) -> int:
        """Return the observation block of ``obs`` at step ``h``."""
        return int(self.step(h).group_block[self.group(h, obs)])

    def latent_of_obs(self, h: int) -> np.ndarray:
        """Return the decoded latent of every codeword at step ``h``."""
        step = self.step(h)
        return step.group_latent[step.group_of]

    def same_latent_structure(self, other: "ObservationLayout") -> bool:
        """Whether both layouts decode every codeword to the same latent."""
        if self.horizon != other.horizon:
            return False
        for mine, theirs in zip(self.steps, other.steps):
            if mine.num_obs != theirs.num_obs:
                return False
            if not np.array_equal(mine.group_of, theirs.group_of):
                return False
            if not np.array_equal(mine.group_latent, theirs.group_latent):
                return False
        return True

    def to_document(self) -> list[dict[str, Any]]:
        """Serialize the layout as JSON-ready lists."""
        return [
            {
                "group_of": step.group_of.tolist(),
                "group_latent": step.group_latent.tolist(),
                "group_block": step.group_block.tolist(),
            }
            for step in self.steps
        ]

    @classmethod
    def from_document(cls, document: list[dict[str, Any]]) -> "ObservationLayout":
        return cls(tuple(
            StepLayout(
                group_of=np.array(step["group_of"]),
                group_latent=np.array(step["group_latent"]),
                group_block=np.array(step["group_block"]),
            )
            for step in document
        ))


def uniform_layout(
    horizon: int,
    group_latents: list[int],
    group_blocks: list[int],
    codewords_per_group: int,
) -> ObservationLayout:
    """Build a layout that repeats the same grouping at every step.

    Args:
        horizon: Number of steps.
        group_latents: Latent id of each codeword group.
        group_blocks: Observation block of each codeword group.
        codewords_per_group: Codewords owned by every group.

    Returns:
        The layout, with the codewords of group ``g`` numbered contiguously.
    """
    if codewords_per_group < 1:
        raise InvalidParameter("codewords_per_group must be at least 1")
    group_of = np.repeat(np.arange(len(group_latents)), codewords_per_group)
    step = StepLayout(
        group_of=group_of,
        group_latent=np.array(group_latents),
        group_block=np.array(group_blocks),
    )
    return ObservationLayout(tuple(step for _ in range(horizon)))
