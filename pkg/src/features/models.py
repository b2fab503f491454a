"""
Learned low-rank models built from transition counts.

A model pairs a feature map with per-step count tables. Its kernel is

    P_h(s' | s, a) = T_h(group(s') | label_h(s), a) * E_{h+1}(s' | group(s'))

which is ``phi_h(s, a)^T mu_h(s')`` with ``mu_h(s')[(l, a)] = T_h(g(s') | l, a) E(s' | g(s'))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np

from src.constants import DEFAULTS
from src.errors import DimensionMismatch, InvalidParameter, PlanningSupportEmpty
from src.features.decoders import FeatureMap
from src.mdp.dynamic_programming import observation_occupancy
from src.mdp.layout import ObservationLayout
from src.mdp.sampling import cumulative, draw_index

if TYPE_CHECKING:
    from src.features.mle import StepSelection
    from src.mdp.block_mdp import BlockMdp
    from src.mdp.policies import Policy


@dataclass(frozen=True, eq=False)
class EmissionEmbedding:
    """Per-step next-state embeddings ``mu_h(s')`` as ``(O_{h+1}, d_h)`` matrices."""
    matrices: tuple[np.ndarray, ...]

    def at(self, h: int) -> np.ndarray:
        return self.matrices[h]

    def mu(self, h: int, next_obs: int) -> np.ndarray:
        return self.matrices[h][next_obs]

    def integrate(self, h: int, weights: np.ndarray) -> np.ndarray:
        """``sum_s' g(s') mu_h(s')`` for a function ``g`` given on the codewords."""
        return np.asarray(weights, dtype=float) @ self.matrices[h]

    def kernel(self, phi: FeatureMap, h: int) -> np.ndarray:
        """``phi^T mu`` on every ``(s, a, s')``, shape ``(O_h, A, O_{h+1})``."""
        return phi.observation_tensor(h) @ self.matrices[h].T


def aggregate_labels(labels: np.ndarray, num_labels: int, group_counts: np.ndarray) -> np.ndarray:
    """Sum group-level rows ``(G, A, G')`` into label-level rows ``(L, A, G')``."""
    out = np.zeros((num_labels,) + group_counts.shape[1:])
    np.add.at(out, labels, group_counts)
    return out


def normalize_rows(counts: np.ndarray, smoothing: float) -> np.ndarray:
    """Smoothed row-normalization; rows without mass become uniform."""
    width = counts.shape[-1]
    smoothed = counts + smoothing
    totals = smoothed.sum(axis=-1, keepdims=True)
    uniform = np.full_like(smoothed, 1.0 / width)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(totals > 0, smoothed / np.where(totals > 0, totals, 1.0), uniform)


@dataclass(frozen=True, eq=False)
class LinearMdpModel:
    """A count-based low-rank model usable as a simulator.

    Attributes:
        phi: Feature map; ``phi.labels(h)`` labels the groups of step ``h``.
        transition_counts: ``(L_h, A, G_{h+1})`` label-to-group counts, ``h < H-1``.
        observation_counts: Codeword counts per step; step 0 gives the initial distribution.
        smoothing: Additive smoothing of every transition cell.
        selections: MLE selection records per step, when learned.
    """
    phi: FeatureMap
    transition_counts: tuple[np.ndarray, ...]
    observation_counts: tuple[np.ndarray, ...]
    smoothing: float = DEFAULTS.SMOOTHING
    selections: tuple["StepSelection", ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "transition_counts", tuple(np.asarray(c, dtype=float) for c in self.transition_counts))
        object.__setattr__(self, "observation_counts", tuple(np.asarray(c, dtype=float) for c in self.observation_counts))
        object.__setattr__(self, "selections", tuple(self.selections))
        if self.smoothing < 0:
            raise InvalidParameter(f"smoothing must be non-negative, got {self.smoothing}")
        H = self.horizon
        if len(self.transition_counts) != H - 1 or len(self.observation_counts) != H:
            raise DimensionMismatch("count tables do not cover the horizon")
        for h, counts in enumerate(self.transition_counts):
            expected = (self.phi.num_labels(h), self.num_actions, self.layout.num_groups(h + 1))
            if counts.shape != expected:
                raise DimensionMismatch(f"transition counts at step {h} have shape {counts.shape}, expected {expected}")

    @property
    def layout(self) -> ObservationLayout:
        return self.phi.layout

    @property
    def horizon(self) -> int:
        return self.phi.horizon

    @property
    def num_actions(self) -> int:
        return self.phi.num_actions

    # ----- probabilities ----------------------------------------------------------

    @cached_property
    def _transitions(self) -> tuple[np.ndarray, ...]:
        return tuple(normalize_rows(c, self.smoothing) for c in self.transition_counts)

    @cached_property
    def _within_group(self) -> tuple[np.ndarray, ...]:
        tables = []
        for h, counts in enumerate(self.observation_counts):
            step = self.layout.step(h)
            totals = np.bincount(step.group_of, weights=counts, minlength=step.num_groups)
            sizes = np.bincount(step.group_of, minlength=step.num_groups)
            group_total = totals[step.group_of]
            with np.errstate(invalid="ignore", divide="ignore"):
                probs = np.where(group_total > 0, counts / np.where(group_total > 0, group_total, 1.0),
                                 1.0 / sizes[step.group_of])
            tables.append(probs)
        return tuple(tables)

    def transition(self, h: int) -> np.ndarray:
        """``T_h(g' | l, a)`` of shape ``(L_h, A, G_{h+1})``."""
        return self._transitions[h]

    def within_group(self, h: int) -> np.ndarray:
        """``E_h(s | group(s))`` for every codeword of step ``h``."""
        return self._within_group[h]

    def group_kernel(self, h: int) -> np.ndarray:
        """Kernel on groups, shape ``(G_h, A, G_{h+1})``."""
        return self.transition(h)[self.phi.labels(h)]

    def kernel(self, h: int) -> np.ndarray:
        """Dense kernel on codewords, shape ``(O_h, A, O_{h+1})``."""
        return self.phi.observation_tensor(h) @ self.mu(h).T

    def mu(self, h: int) -> np.ndarray:
        """``mu_h(s')`` for every next codeword, shape ``(O_{h+1}, L_h * A)``."""
        next_groups = self.layout.step(h + 1).group_of
        T = self.transition(h)
        per_obs = T[:, :, next_groups] * self.within_group(h + 1)[None, None, :]
        return per_obs.reshape(-1, per_obs.shape[2]).T

    def emission_embedding(self) -> EmissionEmbedding:
        return EmissionEmbedding(tuple(self.mu(h) for h in range(self.horizon - 1)))

    def initial_distribution(self) -> np.ndarray:
        counts = self.observation_counts[0]
        if counts.sum() <= 0:
            return np.full(counts.size, 1.0 / counts.size)
        return counts / counts.sum()

    def initial_groups(self) -> np.ndarray:
        step = self.layout.step(0)
        return np.bincount(step.group_of, weights=self.initial_distribution(), minlength=step.num_groups)

    def support(self, h: int) -> np.ndarray:
        """Boolean mask of codeword groups observed at step ``h``."""
        step = self.layout.step(h)
        return np.bincount(step.group_of, weights=self.observation_counts[h], minlength=step.num_groups) > 0

    def planning_kernel(self, h: int) -> np.ndarray:
        """Group kernel restricted to the observed support of step ``h+1``.

        Raises:
            PlanningSupportEmpty: If nothing was observed at step ``h+1``.
        """
        support = self.support(h + 1)
        if not support.any():
            raise PlanningSupportEmpty(f"learned model has an empty support at step {h + 1}")
        kernel = self.group_kernel(h) * support[None, None, :]
        totals = kernel.sum(axis=2, keepdims=True)
        uniform = np.broadcast_to(support / support.sum(), kernel.shape)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(totals > 0, kernel / np.where(totals > 0, totals, 1.0), uniform)

    # ----- simulation -------------------------------------------------------------

    @cached_property
    def _cdfs(self) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...], np.ndarray]:
        transition_cdfs = tuple(cumulative(T) for T in self._transitions)
        member_cdfs = []
        for h in range(self.horizon):
            step = self.layout.step(h)
            within = self.within_group(h)
            member_cdfs.append(tuple(cumulative(within[step.members(g)]) for g in range(step.num_groups)))
        return transition_cdfs, tuple(member_cdfs), cumulative(self.initial_distribution())

    def begin_episode(self) -> None:
        """Model episodes are free."""

    def reset(self, rng: np.random.Generator) -> int:
        return draw_index(self._cdfs[2], rng)

    def step(self, h: int, obs: int, action: int, rng: np.random.Generator) -> int:
        """Sample the next codeword from the model kernel."""
        if h < 0 or h >= self.horizon - 1:
            raise InvalidParameter(f"no transition leaves step {h}")
        transition_cdfs, member_cdfs, _ = self._cdfs
        group = draw_index(transition_cdfs[h][self.phi.index(h, obs), action], rng)
        members = self.layout.step(h + 1).members(group)
        return int(members[draw_index(member_cdfs[h + 1][group], rng)])

    def generative_step(self, h: int, obs: int, action: int, rng: np.random.Generator) -> int:
        return self.step(h, obs, action, rng)

    def to_document(self) -> dict[str, Any]:
        return {
            "format_version": DEFAULTS.DOCUMENT_VERSION,
            "kind": "linear_mdp_model",
            "phi": self.phi.to_document(),
            "smoothing": self.smoothing,
            "transition_counts": [c.tolist() for c in self.transition_counts],
            "observation_counts": [c.tolist() for c in self.observation_counts],
        }


def population_model(env: "BlockMdp", phi: FeatureMap, policy: "Policy") -> LinearMdpModel:
    """Infinite-data limit of the count-based model under ``policy``'s occupancy.

    Counts are replaced by exact occupancy masses and no smoothing is applied.
    """
    if phi.horizon != env.horizon or phi.num_actions != env.num_actions:
        raise DimensionMismatch("feature map does not match the environment")
    transitions, observations = [], []
    for h in range(env.horizon):
        occupancy = observation_occupancy(env, policy, h)
        observations.append(occupancy.sum(axis=1))
        if h < env.horizon - 1:
            group_mass = env.layout.step(h).group_matrix().T @ occupancy
            joint = group_mass[:, :, None] * env.group_kernel(h)
            transitions.append(aggregate_labels(phi.labels(h), phi.num_labels(h), joint))
    return LinearMdpModel(phi=phi, transition_counts=tuple(transitions), observation_counts=tuple(observations),
                          smoothing=0.0)
