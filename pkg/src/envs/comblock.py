"""
Combination-lock Block MDPs.

Each step has three latents: two good ones (0 and 1) and an absorbing bad
one (2). From a good latent the single correct action leads to either good
latent with probability 1/2; every other action leads to the bad latent.
The final step pays 1 on good latents for any action.
"""
from __future__ import annotations

import logging

import numpy as np

from src.constants import DEFAULTS, EMISSION, LOGGER_NAME
from src.errors import InvalidParameter
from src.mdp.block_mdp import BlockMdp
from src.mdp.layout import ObservationLayout, StepLayout, uniform_layout

logger = logging.getLogger(LOGGER_NAME)

NUM_LATENTS = 3
GOOD_LATENTS = (0, 1)
BAD_LATENT = 2
FINAL_REWARD = 1.0
DECOY_REWARD = 0.1
DECOY_PROBABILITY = 0.5


def validate_dimensions(horizon: int, num_actions: int) -> None:
    """Raise if the comblock dimensions are invalid."""
    if horizon < 1:
        raise InvalidParameter(f"horizon must be at least 1, got {horizon}")
    if num_actions < 2:
        raise InvalidParameter(f"num_actions must be at least 2, got {num_actions}")


def draw_optimal_actions(
    horizon: int,
    num_actions: int,
    rng: np.random.Generator,
    distinct: bool = False,
) -> np.ndarray:
    """Draw the correct action of each good latent at each transition step.

    Args:
        horizon: Number of steps H.
        num_actions: Number of actions A.
        rng: Random stream.
        distinct: Resample a step until both good latents need different actions.

    Returns:
        Array of shape ``(H-1, 2)``.
    """
    actions = rng.integers(num_actions, size=(max(horizon - 1, 0), len(GOOD_LATENTS)))
    if distinct:
        for h in range(actions.shape[0]):
            while actions[h, 0] == actions[h, 1]:
                actions[h] = rng.integers(num_actions, size=len(GOOD_LATENTS))
    return actions


def lock_transitions(optimal_actions: np.ndarray, num_actions: int) -> list[np.ndarray]:
    """Latent transition tensors of a combination lock."""
    transitions = []
    for correct in optimal_actions:
        T = np.zeros((NUM_LATENTS, num_actions, NUM_LATENTS))
        T[:, :, BAD_LATENT] = 1.0
        for z in GOOD_LATENTS:
            T[z, correct[z]] = 0.0
            T[z, correct[z], list(GOOD_LATENTS)] = 0.5
        transitions.append(T)
    return transitions


def lock_rewards(
    horizon: int, num_actions: int, optimal_actions: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Reward values and firing probabilities of a combination lock.

    Wrong actions taken in a good latent pay a decoy that fires with
    probability 1/2; the final step pays 1 on good latents for every action.
    """
    values, probs = [], []
    for h in range(horizon):
        value = np.zeros((NUM_LATENTS, num_actions))
        prob = np.zeros((NUM_LATENTS, num_actions))
        if h == horizon - 1:
            value[list(GOOD_LATENTS)] = FINAL_REWARD
            prob[list(GOOD_LATENTS)] = 1.0
        else:
            for z in GOOD_LATENTS:
                wrong = np.arange(num_actions) != optimal_actions[h, z]
                value[z, wrong] = DECOY_REWARD
                prob[z, wrong] = DECOY_PROBABILITY
        values.append(value)
        probs.append(prob)
    return values, probs


def block_emission(step: StepLayout, block_of_latent: np.ndarray) -> np.ndarray:
    """Emit each latent uniformly over its codeword group inside the chosen block.

    Args:
        step: Layout of the step.
        block_of_latent: Block used by each latent.

    Returns:
        Emission matrix of shape ``(Z, O)``.
    """
    emission = np.zeros((step.num_latents, step.num_obs))
    for z, block in enumerate(block_of_latent):
        matches = np.flatnonzero((step.group_latent == z) & (step.group_block == block))
        if matches.size != 1:
            raise InvalidParameter(f"latent {z} has no unique codeword group in block {block}")
        members = step.members(int(matches[0]))
        emission[z, members] = 1.0 / members.size
    return emission


def lock_layout(horizon: int, num_blocks: int, codewords_per_latent: int) -> ObservationLayout:
    """Layout with ``num_blocks`` blocks of three codeword groups each."""
    group_latents = list(range(NUM_LATENTS)) * num_blocks
    group_blocks = list(np.repeat(np.arange(num_blocks), NUM_LATENTS))
    return uniform_layout(horizon, group_latents, group_blocks, codewords_per_latent)


def assemble_lock(
    horizon: int,
    num_actions: int,
    optimal_actions: np.ndarray,
    layout: ObservationLayout,
    blocks: np.ndarray,
    emission_mode: str,
    noise_scale: float,
    name: str,
    seed: int | None = None,
) -> BlockMdp:
    """Build a comblock from its correct actions and a per-(h, z) block assignment."""
    values, probs = lock_rewards(horizon, num_actions, optimal_actions)
    initial = np.zeros(NUM_LATENTS)
    initial[list(GOOD_LATENTS)] = 1.0 / len(GOOD_LATENTS)
    return BlockMdp(
        horizon=horizon,
        num_actions=num_actions,
        layout=layout,
        transitions=tuple(lock_transitions(optimal_actions, num_actions)),
        emissions=tuple(block_emission(layout.step(h), blocks[h]) for h in range(horizon)),
        reward_values=tuple(values),
        reward_probs=tuple(probs),
        initial=initial,
        emission_mode=emission_mode,
        noise_scale=noise_scale,
        name=name,
        seed=seed,
    )


def build_comblock(
    horizon: int,
    num_actions: int,
    emission_mode: str = EMISSION.DECODABLE,
    rng: np.random.Generator | None = None,
    codewords_per_latent: int = DEFAULTS.CODEWORDS_PER_LATENT,
    noise_scale: float = DEFAULTS.NOISE_SCALE,
    name: str = "comblock",
    seed: int | None = None,
) -> BlockMdp:
    """Build a single combination lock with uniformly drawn correct actions.

    Args:
        horizon: Number of steps H (at least 1).
        num_actions: Number of actions A (at least 2).
        emission_mode: ``"decodable"`` or ``"noisy"``.
        rng: Random stream for the correct actions; seeded from ``seed`` if omitted.
        codewords_per_latent: Codewords in each latent's group.
        noise_scale: Rendering noise in noisy mode.
        name: Environment name.
        seed: Seed recorded in the environment document.

    Returns:
        The environment.

    Raises:
        InvalidParameter: On invalid dimensions.
    """
    validate_dimensions(horizon, num_actions)
    if rng is None:
        rng = np.random.default_rng(seed)
    optimal_actions = draw_optimal_actions(horizon, num_actions, rng)
    layout = lock_layout(horizon, 1, codewords_per_latent)
    blocks = np.zeros((horizon, NUM_LATENTS), dtype=np.int64)
    env = assemble_lock(
        horizon, num_actions, optimal_actions, layout, blocks, emission_mode, noise_scale, name, seed
    )
    logger.debug(f"Built {name}: H={horizon}, A={num_actions}, mode={emission_mode}")
    return env


def optimal_actions_of(env: BlockMdp) -> np.ndarray:
    """Recover the correct action table ``(H-1, 2)`` of a comblock."""
    table = np.zeros((env.horizon - 1, len(GOOD_LATENTS)), dtype=np.int64)
    for h, T in enumerate(env.transitions):
        for z in GOOD_LATENTS:
            table[h, z] = int(np.argmax(T[z, :, BAD_LATENT] < 1.0))
    return table
