"""
Finite-latent episodic Block MDPs with rich observations.

Steps are numbered ``h = 0 .. H-1``. Latent transitions exist for
``h = 0 .. H-2``; an episode ends after the action at step ``H-1``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
from scipy.linalg import hadamard

from src.constants import DEFAULTS, EMISSION, LOGGER_NAME
from src.errors import ConfigError, DimensionMismatch, InvalidParameter
from src.mdp.layout import ObservationLayout
from src.mdp.sampling import cumulative, draw_index

logger = logging.getLogger(LOGGER_NAME)

TOLERANCE = 1e-12


def _as_tuple(arrays: Any) -> tuple[np.ndarray, ...]:
    return tuple(np.asarray(a, dtype=float) for a in arrays)


@dataclass(frozen=True, eq=False)
class BlockMdp:
    """A Block MDP: latent dynamics plus an emission process over codewords.

    Attributes:
        horizon: Number of decision steps H.
        num_actions: Number of actions A.
        layout: Codeword layout; decodes every observation to its latent.
        transitions: ``transitions[h][z, a, z']`` for ``h < H-1``.
        emissions: ``emissions[h][z, o]`` over the codewords of step ``h``.
        reward_values: Reward paid at ``(h, z, a)`` when the reward fires.
        reward_probs: Probability that the reward at ``(h, z, a)`` fires.
        initial: Distribution of the latent state at ``h = 0``.
        emission_mode: ``"decodable"`` or ``"noisy"``.
        noise_scale: Standard deviation of the rendering noise in noisy mode.
    """
    horizon: int
    num_actions: int
    layout: ObservationLayout
    transitions: tuple[np.ndarray, ...]
    emissions: tuple[np.ndarray, ...]
    reward_values: tuple[np.ndarray, ...]
    reward_probs: tuple[np.ndarray, ...]
    initial: np.ndarray
    emission_mode: str = EMISSION.DECODABLE
    noise_scale: float = DEFAULTS.NOISE_SCALE
    name: str = "block-mdp"
    seed: int | None = None
    latent_counts: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        """Normalize arrays and validate the model."""
        object.__setattr__(self, "transitions", _as_tuple(self.transitions))
        object.__setattr__(self, "emissions", _as_tuple(self.emissions))
        object.__setattr__(self, "reward_values", _as_tuple(self.reward_values))
        object.__setattr__(self, "reward_probs", _as_tuple(self.reward_probs))
        object.__setattr__(self, "initial", np.asarray(self.initial, dtype=float))
        object.__setattr__(
            self, "latent_counts", tuple(self.layout.num_latents(h) for h in range(self.layout.horizon))
        )
        self._validate()

    def _validate(self) -> None:
        """Check shapes, stochasticity and the block structure."""
        H, A = self.horizon, self.num_actions
        if H < 1:
            raise InvalidParameter(f"horizon must be positive, got {H}")
        if A < 1:
            raise InvalidParameter(f"num_actions must be positive, got {A}")
        if self.layout.horizon != H:
            raise DimensionMismatch(f"layout covers {self.layout.horizon} steps, expected {H}")
        if len(self.transitions) != H - 1:
            raise DimensionMismatch(f"expected {H - 1} transition tensors, got {len(self.transitions)}")
        if len(self.emissions) != H or len(self.reward_values) != H or len(self.reward_probs) != H:
            raise DimensionMismatch("emissions and rewards need one entry per step")
        if self.emission_mode not in (EMISSION.DECODABLE, EMISSION.NOISY):
            raise InvalidParameter(f"unknown emission mode: {self.emission_mode}")
        if self.noise_scale < 0:
            raise InvalidParameter(f"noise_scale must be non-negative, got {self.noise_scale}")

        Z = self.latent_counts
        for h, T in enumerate(self.transitions):
            if T.shape != (Z[h], A, Z[h + 1]):
                raise DimensionMismatch(f"transition {h} has shape {T.shape}, expected {(Z[h], A, Z[h + 1])}")
            if T.min() < 0 or np.abs(T.sum(axis=2) - 1.0).max() > TOLERANCE:
                raise InvalidParameter(f"transition rows at step {h} are not distributions")
        for h, O in enumerate(self.emissions):
            step = self.layout.step(h)
            if O.shape != (Z[h], step.num_obs):
                raise DimensionMismatch(f"emission {h} has shape {O.shape}, expected {(Z[h], step.num_obs)}")
            if O.min() < 0 or np.abs(O.sum(axis=1) - 1.0).max() > TOLERANCE:
                raise InvalidParameter(f"emission rows at step {h} are not distributions")
            owner = self.layout.latent_of_obs(h)
            foreign = O[owner[None, :] != np.arange(Z[h])[:, None]]
            if foreign.size and foreign.max() > 0:
                raise InvalidParameter(f"emission supports overlap across latents at step {h}")
        for h in range(H):
            values, probs = self.reward_values[h], self.reward_probs[h]
            if values.shape != (Z[h], A) or probs.shape != (Z[h], A):
                raise DimensionMismatch(f"reward tables at step {h} must have shape {(Z[h], A)}")
            if values.min() < 0 or values.max() > 1 or probs.min() < 0 or probs.max() > 1:
                raise InvalidParameter(f"rewards at step {h} must lie in [0, 1]")
        if self.initial.shape != (Z[0],) or self.initial.min() < 0:
            raise DimensionMismatch("initial distribution must cover the latents of step 0")
        if abs(self.initial.sum() - 1.0) > TOLERANCE:
            raise InvalidParameter("initial distribution does not sum to 1")

    # ----- cached sampling tables -------------------------------------------------

    @cached_property
    def _transition_cdfs(self) -> tuple[np.ndarray, ...]:
        return tuple(cumulative(T) for T in self.transitions)

    @cached_property
    def _emission_cdfs(self) -> tuple[np.ndarray, ...]:
        return tuple(cumulative(O) for O in self.emissions)

    @cached_property
    def _initial_cdf(self) -> np.ndarray:
        return cumulative(self.initial)

    @cached_property
    def mixing_matrix(self) -> np.ndarray:
        """Orthonormal Hadamard matrix used to render noisy observations."""
        width = max(self.layout.num_obs(h) for h in range(self.horizon)) + self.horizon
        size = 1 << (width - 1).bit_length()
        return hadamard(size).astype(float) / np.sqrt(size)

    # ----- simulation -------------------------------------------------------------

    @property
    def is_noisy(self) -> bool:
        return self.emission_mode == EMISSION.NOISY

    def initial_latent(self, rng: np.random.Generator) -> int:
        return draw_index(self._initial_cdf, rng)

    def next_latent(self, h: int, z: int, a: int, rng: np.random.Generator) -> int:
        return draw_index(self._transition_cdfs[h][z, a], rng)

    def emit(self, h: int, z: int, rng: np.random.Generator) -> int:
        """Emit an observation for latent ``z`` at step ``h``."""
        obs = draw_index(self._emission_cdfs[h][z], rng)
        if self.is_noisy:
            obs = self.quantize(h, self.render(h, obs, rng))
        return obs

    def render(self, h: int, obs: int, rng: np.random.Generator) -> np.ndarray:
        """Render a codeword as a mixed, noise-perturbed vector."""
        mixing = self.mixing_matrix
        base = np.zeros(mixing.shape[0])
        base[obs] = 1.0
        base[max(self.layout.num_obs(k) for k in range(self.horizon)) + h] = 1.0
        return mixing @ base + rng.normal(0.0, self.noise_scale, size=base.size)

    def quantize(self, h: int, vector: np.ndarray) -> int:
        """Map a rendered vector back to its nearest codeword at step ``h``."""
        coordinates = self.mixing_matrix.T @ vector
        return int(np.argmax(coordinates[: self.layout.num_obs(h)]))

    def draw_reward(self, h: int, z: int, a: int, rng: np.random.Generator) -> float:
        """Draw the realized reward at latent ``z`` and action ``a``."""
        if rng.random() < self.reward_probs[h][z, a]:
            return float(self.reward_values[h][z, a])
        return 0.0

    def reset(self, rng: np.random.Generator) -> int:
        """Start an episode and return the first observation."""
        return self.emit(0, self.initial_latent(rng), rng)

    def generative_step(self, h: int, obs: int, action: int, rng: np.random.Generator) -> int:
        """Sample ``s' ~ P_h(. | s, a)`` from an arbitrary observation.

        Raises:
            InvalidParameter: If ``h`` has no outgoing transition or ``action`` is out of range.
            UnknownObservation: If ``obs`` is not a codeword of step ``h``.
        """
        if h < 0 or h >= self.horizon - 1:
            raise InvalidParameter(f"no transition leaves step {h} (horizon {self.horizon})")
        if action < 0 or action >= self.num_actions:
            raise InvalidParameter(f"action {action} outside [0, {self.num_actions})")
        z = self.layout.decode(h, obs)
        return self.emit(h + 1, self.next_latent(h, z, action, rng), rng)

    def step(self, h: int, obs: int, action: int, rng: np.random.Generator) -> int:
        """Continue an episode; a Block MDP step only depends on the decoded latent."""
        return self.generative_step(h, obs, action, rng)

    def begin_episode(self) -> None:
        """Episodes on a raw environment are not accounted."""

    # ----- exact quantities -------------------------------------------------------

    def reward_mean(self, h: int) -> np.ndarray:
        """Expected reward table ``(Z_h, A)`` at step ``h``."""
        return self.reward_values[h] * self.reward_probs[h]

    def latent_rewards(self) -> list[np.ndarray]:
        return [self.reward_mean(h) for h in range(self.horizon)]

    def group_reward(self, h: int) -> np.ndarray:
        """Expected reward lifted to codeword groups, shape ``(G_h, A)``."""
        return self.reward_mean(h)[self.layout.step(h).group_latent]

    def group_rewards(self) -> list[np.ndarray]:
        return [self.group_reward(h) for h in range(self.horizon)]

    def group_emission(self, h: int) -> np.ndarray:
        """Probability of each codeword group given the latent, shape ``(Z_h, G_h)``."""
        return self.emissions[h] @ self.layout.step(h).group_matrix()

    def kernel(self, h: int) -> np.ndarray:
        """Dense observation kernel ``P_h(s' | s, a)`` of shape ``(O_h, A, O_{h+1})``."""
        latent_rows = self.transitions[h][self.layout.latent_of_obs(h)]
        return latent_rows @ self.emissions[h + 1]

    def group_kernel(self, h: int) -> np.ndarray:
        """Group-level kernel of shape ``(G_h, A, G_{h+1})``."""
        latent_rows = self.transitions[h][self.layout.step(h).group_latent]
        return latent_rows @ self.group_emission(h + 1)

    # ----- serialization ----------------------------------------------------------

    def to_document(self) -> dict[str, Any]:
        """Serialize the environment as a versioned JSON-ready document."""
        return {
            "format_version": DEFAULTS.DOCUMENT_VERSION,
            "kind": "block_mdp",
            "name": self.name,
            "seed": self.seed,
            "horizon": self.horizon,
            "num_actions": self.num_actions,
            "emission_mode": self.emission_mode,
            "noise_scale": self.noise_scale,
            "layout": self.layout.to_document(),
            "transitions": [T.tolist() for T in self.transitions],
            "emissions": [O.tolist() for O in self.emissions],
            "reward_values": [r.tolist() for r in self.reward_values],
            "reward_probs": [p.tolist() for p in self.reward_probs],
            "initial": self.initial.tolist(),
        }

    @classmethod
    def from_document(cls, document: dict[str, Any]) -> "BlockMdp":
        """Rebuild an environment from :meth:`to_document` output.

        Raises:
            ConfigError: If the document has an unknown format version or kind.
        """
        version = document.get("format_version")
        if version != DEFAULTS.DOCUMENT_VERSION or document.get("kind") != "block_mdp":
            raise ConfigError(f"unsupported environment document (version {version})")
        return cls(
            horizon=int(document["horizon"]),
            num_actions=int(document["num_actions"]),
            layout=ObservationLayout.from_document(document["layout"]),
            transitions=tuple(np.array(T) for T in document["transitions"]),
            emissions=tuple(np.array(O) for O in document["emissions"]),
            reward_values=tuple(np.array(r) for r in document["reward_values"]),
            reward_probs=tuple(np.array(p) for p in document["reward_probs"]),
            initial=np.array(document["initial"]),
            emission_mode=document["emission_mode"],
            noise_scale=float(document["noise_scale"]),
            name=document["name"],
            seed=document["seed"],
        )
