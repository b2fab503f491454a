"""
Transition datasets and their sufficient statistics.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.constants import SAMPLING
from src.errors import EmptyDataset, InvalidParameter, MismatchedTasks, UnknownObservation
from src.mdp.layout import ObservationLayout


@dataclass(eq=False)
class TransitionDataset:
    """``(s, a, s')`` tuples per step.

    ``task_pair = (i, j)``: ``s'`` was generated by task ``i`` from a state
    ``s`` produced by task ``j``. Online data uses ``(k, k)``.
    """
    task_pair: tuple[int, int]
    tuples: dict[int, np.ndarray] = field(default_factory=dict)
    mode: str = SAMPLING.CROSS

    def __post_init__(self) -> None:
        self.tuples = {int(h): np.asarray(rows, dtype=np.int64).reshape(-1, 3) for h, rows in self.tuples.items()}
        if self.mode not in (SAMPLING.CROSS, SAMPLING.ON_POLICY):
            raise InvalidParameter(f"unknown sampling mode: {self.mode}")

    @property
    def generating_task(self) -> int:
        return self.task_pair[0]

    @property
    def planting_task(self) -> int:
        return self.task_pair[1]

    @property
    def steps(self) -> list[int]:
        return sorted(self.tuples)

    def size(self, h: int | None = None) -> int:
        if h is None:
            return int(sum(rows.shape[0] for rows in self.tuples.values()))
        return int(self.tuples.get(h, np.zeros((0, 3))).shape[0])

    def to_frame(self) -> pd.DataFrame:
        """Tabular view with columns ``h, s, a, s_next, task_i, task_j``."""
        frames = [
            pd.DataFrame({"h": h, "s": rows[:, 0], "a": rows[:, 1], "s_next": rows[:, 2]})
            for h, rows in sorted(self.tuples.items())
        ]
        frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["h", "s", "a", "s_next"])
        frame["task_i"], frame["task_j"] = self.task_pair
        return frame

    def to_csv(self, path: str) -> None:
        self.to_frame().to_csv(path, index=False)


class TransitionCounts:
    """Group-level transition counts and observation counts per task.

    Attributes:
        transitions: ``transitions[k][h]`` has shape ``(G_h, A, G_{h+1})``.
        observations: ``observations[k][h]`` counts codewords of step ``h``;
            step 0 counts estimate the initial distribution.
    """

    def __init__(self, layout: ObservationLayout, num_actions: int, num_tasks: int) -> None:
        self.layout = layout
        self.num_actions = num_actions
        self.num_tasks = num_tasks
        H = layout.horizon
        self.transitions = [
            [np.zeros((layout.num_groups(h), num_actions, layout.num_groups(h + 1))) for h in range(H - 1)]
            for _ in range(num_tasks)
        ]
        self.observations = [[np.zeros(layout.num_obs(h)) for h in range(H)] for _ in range(num_tasks)]

    def add(self, dataset: TransitionDataset) -> None:
        """Accumulate one dataset.

        Raises:
            MismatchedTasks: If the dataset refers to a task outside the range.
            UnknownObservation: If a tuple holds an unknown codeword.
        """
        i, j = dataset.task_pair
        if not (0 <= i < self.num_tasks and 0 <= j < self.num_tasks):
            raise MismatchedTasks(f"dataset task pair {dataset.task_pair} outside {self.num_tasks} tasks")
        for h, rows in dataset.tuples.items():
            if rows.size == 0:
                continue
            if h < 0 or h >= self.layout.horizon - 1:
                raise InvalidParameter(f"transition step {h} outside horizon {self.layout.horizon}")
            s, a, s_next = rows[:, 0], rows[:, 1], rows[:, 2]
            if s.min() < 0 or s.max() >= self.layout.num_obs(h):
                raise UnknownObservation(f"dataset holds an unknown codeword at step {h}")
            if s_next.min() < 0 or s_next.max() >= self.layout.num_obs(h + 1):
                raise UnknownObservation(f"dataset holds an unknown codeword at step {h + 1}")
            if a.min() < 0 or a.max() >= self.num_actions:
                raise InvalidParameter(f"dataset holds an action outside [0, {self.num_actions})")
            g = self.layout.step(h).group_of[s]
            g_next = self.layout.step(h + 1).group_of[s_next]
            np.add.at(self.transitions[i][h], (g, a, g_next), 1.0)
            np.add.at(self.observations[j][h], s, 1.0)
            np.add.at(self.observations[i][h + 1], s_next, 1.0)

    @classmethod
    def from_datasets(
        cls,
        datasets: list[TransitionDataset],
        layout: ObservationLayout,
        num_actions: int,
        num_tasks: int,
    ) -> "TransitionCounts":
        counts = cls(layout, num_actions, num_tasks)
        for dataset in datasets:
            counts.add(dataset)
        if counts.total() == 0:
            raise EmptyDataset("no transition tuples were supplied")
        return counts

    def total(self, h: int | None = None) -> float:
        steps = range(self.layout.horizon - 1) if h is None else [h]
        return float(sum(self.transitions[k][s].sum() for k in range(self.num_tasks) for s in steps))

    def stacked(self, h: int) -> np.ndarray:
        """Counts of every task at step ``h``, shape ``(K, G_h, A, G_{h+1})``."""
        return np.stack([self.transitions[k][h] for k in range(self.num_tasks)])

    def copy(self) -> "TransitionCounts":
        clone = TransitionCounts(self.layout, self.num_actions, self.num_tasks)
        clone.transitions = [[t.copy() for t in task] for task in self.transitions]
        clone.observations = [[o.copy() for o in task] for task in self.observations]
        return clone
