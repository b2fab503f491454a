"""
Transfer suites: K source tasks and a target in their linear span.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.constants import DEFAULTS, EMISSION, FAMILIES, LOGGER_NAME
from src.envs.comblock import (
    NUM_LATENTS,
    assemble_lock,
    draw_optimal_actions,
    lock_layout,
    optimal_actions_of,
    validate_dimensions,
)
from src.errors import (
    ConfigError,
    DimensionMismatch,
    InvalidParameter,
    InvalidWeights,
    SpanCoefficientsMissing,
)
from src.mdp.block_mdp import BlockMdp

logger = logging.getLogger(LOGGER_NAME)

SPAN_TOLERANCE = 1e-9


@dataclass(eq=False)
class TransferSuite:
    """Source tasks, a target, and (optionally) the exact span record.

    ``span_coefficients[h]`` has shape ``(K, O_{h+1})`` and satisfies
    ``P_target,h(s'|s,a) = sum_k alpha[h][k, s'] * P_k,h(s'|s,a)``.
    """
    sources: list[BlockMdp]
    target: BlockMdp
    span_coefficients: list[np.ndarray] | None = None
    family: str = ""
    name: str = "suite"
    notes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        """Every task must share H, A and the decoder."""
        if not self.sources:
            raise InvalidParameter("a suite needs at least one source")
        for task in self.tasks:
            if task.horizon != self.target.horizon or task.num_actions != self.target.num_actions:
                raise DimensionMismatch(f"{task.name} disagrees with the target on H or A")
            if task.latent_counts != self.target.latent_counts:
                raise DimensionMismatch(f"{task.name} has different latent counts")
            if not task.layout.same_latent_structure(self.target.layout):
                raise DimensionMismatch(f"{task.name} does not share the target's decoder")
        if self.span_coefficients is not None:
            K = len(self.sources)
            for h, alpha in enumerate(self.span_coefficients):
                expected = (K, self.target.layout.num_obs(h + 1))
                if alpha.shape != expected:
                    raise DimensionMismatch(f"span coefficients at step {h} must have shape {expected}")

    @property
    def num_sources(self) -> int:
        return len(self.sources)

    @property
    def tasks(self) -> list[BlockMdp]:
        return [*self.sources, self.target]

    @property
    def horizon(self) -> int:
        return self.target.horizon

    @property
    def num_actions(self) -> int:
        return self.target.num_actions

    @property
    def alpha_max(self) -> float:
        """Largest absolute span coefficient."""
        coefficients = self._require_span()
        return float(max(np.abs(alpha).max() for alpha in coefficients)) if coefficients else 0.0

    @property
    def alpha_bar(self) -> float:
        """``max_h sum_k max_s' |alpha_{k;h}(s')|``."""
        coefficients = self._require_span()
        return float(max(np.abs(alpha).max(axis=1).sum() for alpha in coefficients)) if coefficients else 0.0

    def _require_span(self) -> list[np.ndarray]:
        if self.span_coefficients is None:
            raise SpanCoefficientsMissing(f"suite {self.name} has no span record")
        return self.span_coefficients

    def span_error(self) -> float:
        """Largest entrywise gap between the target kernel and its span reconstruction."""
        coefficients = self._require_span()
        worst = 0.0
        for h, alpha in enumerate(coefficients):
            combined = sum(alpha[k][None, None, :] * source.kernel(h) for k, source in enumerate(self.sources))
            worst = max(worst, float(np.abs(self.target.kernel(h) - combined).max()))
        return worst

    def to_document(self) -> dict[str, Any]:
        """Serialize the suite manifest."""
        return {
            "format_version": DEFAULTS.DOCUMENT_VERSION,
            "kind": "transfer_suite",
            "name": self.name,
            "family": self.family,
            "sources": [source.to_document() for source in self.sources],
            "target": self.target.to_document(),
            "span_coefficients": (
                None if self.span_coefficients is None else [a.tolist() for a in self.span_coefficients]
            ),
            "notes": self.notes,
        }

    @classmethod
    def from_document(cls, document: dict[str, Any]) -> "TransferSuite":
        version = document.get("format_version")
        if version != DEFAULTS.DOCUMENT_VERSION or document.get("kind") != "transfer_suite":
            raise ConfigError(f"unsupported suite document (version {version})")
        span = document.get("span_coefficients")
        return cls(
            sources=[BlockMdp.from_document(d) for d in document["sources"]],
            target=BlockMdp.from_document(document["target"]),
            span_coefficients=None if span is None else [np.array(a) for a in span],
            family=document.get("family", ""),
            name=document.get("name", "suite"),
            notes=document.get("notes", {}),
        )


def _selection_record(choice: np.ndarray, num_sources: int, env: BlockMdp) -> list[np.ndarray]:
    """0/1 span coefficients selecting source ``choice[h]`` at every transition step."""
    record = []
    for h, k in enumerate(choice):
        alpha = np.zeros((num_sources, env.layout.num_obs(h + 1)))
        alpha[k] = 1.0
        record.append(alpha)
    return record


def build_shared_emission_suite(
    num_sources: int,
    horizon: int,
    rng: np.random.Generator,
    num_actions: int = 4,
    emission_mode: str = EMISSION.DECODABLE,
    codewords_per_latent: int = DEFAULTS.CODEWORDS_PER_LATENT,
    noise_scale: float = DEFAULTS.NOISE_SCALE,
) -> TransferSuite:
    """Comblocks sharing one emission process; the target copies one source per step.

    At every transition step the target's dynamics (and decoy rewards) come
    from a uniformly drawn source, redrawn until that source's two good
    latents need different actions.

    Raises:
        InvalidParameter: If ``num_sources < 2`` or the dimensions are invalid.
    """
    if num_sources < 2:
        raise InvalidParameter(f"a shared-emission suite needs at least 2 sources, got {num_sources}")
    validate_dimensions(horizon, num_actions)
    layout = lock_layout(horizon, 1, codewords_per_latent)
    blocks = np.zeros((horizon, NUM_LATENTS), dtype=np.int64)
    source_actions = [draw_optimal_actions(horizon, num_actions, rng) for _ in range(num_sources)]
    sources = [
        assemble_lock(horizon, num_actions, actions, layout, blocks, emission_mode, noise_scale, f"source-{k}")
        for k, actions in enumerate(source_actions)
    ]

    choice = np.zeros(horizon - 1, dtype=np.int64)
    target_actions = np.zeros((horizon - 1, 2), dtype=np.int64)
    for h in range(horizon - 1):
        eligible = [k for k in range(num_sources) if source_actions[k][h, 0] != source_actions[k][h, 1]]
        if not eligible:
            logger.warning(f"No source has distinct good actions at step {h}; target keeps a uniform pick")
            choice[h] = rng.integers(num_sources)
        else:
            k = int(rng.integers(num_sources))
            while k not in eligible:
                k = int(rng.integers(num_sources))
            choice[h] = k
        target_actions[h] = source_actions[choice[h]][h]

    target = assemble_lock(
        horizon, num_actions, target_actions, layout, blocks, emission_mode, noise_scale, "target"
    )
    suite = TransferSuite(
        sources=sources,
        target=target,
        span_coefficients=_selection_record(choice, num_sources, target),
        family=FAMILIES.SHARED_EMISSION,
        name=f"{FAMILIES.SHARED_EMISSION}-K{num_sources}-H{horizon}-A{num_actions}",
        notes={"source_choice": choice.tolist()},
    )
    logger.info(f"Built {suite.name}; target copies sources {choice.tolist()}")
    return suite


def build_partitioned_suite(
    num_sources: int,
    horizon: int,
    rng: np.random.Generator,
    num_actions: int = 4,
    emission_mode: str = EMISSION.DECODABLE,
    codewords_per_latent: int = DEFAULTS.CODEWORDS_PER_LATENT,
    noise_scale: float = DEFAULTS.NOISE_SCALE,
) -> TransferSuite:
    """Comblocks with identical dynamics and disjoint observation blocks.

    Source ``k`` emits only into block ``k``. The target emits each latent at
    each step into the block of a uniformly drawn source.

    Raises:
        InvalidParameter: If ``num_sources < 2`` or the dimensions are invalid.
    """
    if num_sources < 2:
        raise InvalidParameter(f"a partitioned suite needs at least 2 sources, got {num_sources}")
    validate_dimensions(horizon, num_actions)
    layout = lock_layout(horizon, num_sources, codewords_per_latent)
    actions = draw_optimal_actions(horizon, num_actions, rng, distinct=True)
    sources = [
        assemble_lock(
            horizon, num_actions, actions, layout, np.full((horizon, NUM_LATENTS), k),
            emission_mode, noise_scale, f"source-{k}",
        )
        for k in range(num_sources)
    ]
    target_blocks = rng.integers(num_sources, size=(horizon, NUM_LATENTS))
    target = assemble_lock(
        horizon, num_actions, actions, layout, target_blocks, emission_mode, noise_scale, "target"
    )

    record = []
    for h in range(horizon - 1):
        step = layout.step(h + 1)
        obs_block = step.group_block[step.group_of]
        obs_latent = step.group_latent[step.group_of]
        used = target_blocks[h + 1][obs_latent] == obs_block
        alpha = np.zeros((num_sources, step.num_obs))
        for k in range(num_sources):
            alpha[k] = (obs_block == k) & used
        record.append(alpha)

    suite = TransferSuite(
        sources=sources,
        target=target,
        span_coefficients=record,
        family=FAMILIES.PARTITIONED,
        name=f"{FAMILIES.PARTITIONED}-K{num_sources}-H{horizon}-A{num_actions}",
        notes={"target_blocks": target_blocks.tolist()},
    )
    logger.info(f"Built {suite.name}; target blocks {target_blocks.tolist()}")
    return suite


def _all_close(arrays: list[tuple[np.ndarray, ...]]) -> bool:
    first = arrays[0]
    return all(
        all(np.abs(mine - theirs).max(initial=0.0) <= 1e-12 for mine, theirs in zip(first, other))
        for other in arrays[1:]
    )


def build_mixture_target(
    sources: list[BlockMdp],
    weights: list[float] | np.ndarray,
    name: str = "target",
) -> TransferSuite:
    """Target whose kernel is the convex combination ``sum_k p_k P_k``.

    Sources sharing one emission process are mixed through their latent
    transitions; sources sharing latent transitions are mixed through their
    emissions.

    Raises:
        InvalidWeights: If ``weights`` is not a probability vector over the
            sources, or the sources share neither emissions nor transitions.
    """
    p = np.asarray(weights, dtype=float)
    if not sources or p.shape != (len(sources),):
        raise InvalidWeights("one weight per source is required")
    if p.min() < 0 or abs(p.sum() - 1.0) > 1e-12:
        raise InvalidWeights(f"weights must be a probability vector, got {p.tolist()}")
    head = sources[0]
    for source in sources[1:]:
        if (
            source.horizon != head.horizon
            or source.num_actions != head.num_actions
            or not source.layout.same_latent_structure(head.layout)
        ):
            raise InvalidWeights("mixed sources must share H, A and the decoder")

    def mix(arrays: list[np.ndarray]) -> np.ndarray:
        return sum(weight * array for weight, array in zip(p, arrays))

    shared_emissions = _all_close([s.emissions for s in sources])
    shared_transitions = _all_close([s.transitions for s in sources])
    if shared_emissions:
        transitions = tuple(mix([s.transitions[h] for s in sources]) for h in range(head.horizon - 1))
        emissions = head.emissions
    elif shared_transitions:
        transitions = head.transitions
        emissions = tuple(mix([s.emissions[h] for s in sources]) for h in range(head.horizon))
    else:
        raise InvalidWeights("sources share neither emissions nor latent transitions")

    if _all_close([s.reward_values for s in sources]) and _all_close([s.reward_probs for s in sources]):
        reward_values, reward_probs = head.reward_values, head.reward_probs
    else:
        reward_values = tuple(mix([s.reward_mean(h) for s in sources]) for h in range(head.horizon))
        reward_probs = tuple(np.ones_like(r) for r in reward_values)

    target = BlockMdp(
        horizon=head.horizon,
        num_actions=head.num_actions,
        layout=head.layout,
        transitions=transitions,
        emissions=emissions,
        reward_values=reward_values,
        reward_probs=reward_probs,
        initial=mix([s.initial for s in sources]),
        emission_mode=head.emission_mode,
        noise_scale=head.noise_scale,
        name=name,
    )
    record = [
        np.repeat(p[:, None], head.layout.num_obs(h + 1), axis=1) for h in range(head.horizon - 1)
    ]
    return TransferSuite(
        sources=list(sources),
        target=target,
        span_coefficients=record,
        family=FAMILIES.MIXTURE,
        name=f"{FAMILIES.MIXTURE}-K{len(sources)}-H{head.horizon}-A{head.num_actions}",
        notes={"weights": p.tolist()},
    )


def build_comblock_mixture_suite(
    num_sources: int,
    horizon: int,
    rng: np.random.Generator,
    num_actions: int = 4,
    weights: list[float] | None = None,
    emission_mode: str = EMISSION.DECODABLE,
    codewords_per_latent: int = DEFAULTS.CODEWORDS_PER_LATENT,
) -> TransferSuite:
    """Shared-emission comblock sources mixed by ``weights`` (uniform if omitted)."""
    if num_sources < 1:
        raise InvalidParameter("a mixture suite needs at least one source")
    validate_dimensions(horizon, num_actions)
    layout = lock_layout(horizon, 1, codewords_per_latent)
    blocks = np.zeros((horizon, NUM_LATENTS), dtype=np.int64)
    sources = [
        assemble_lock(
            horizon, num_actions, draw_optimal_actions(horizon, num_actions, rng), layout, blocks,
            emission_mode, DEFAULTS.NOISE_SCALE, f"source-{k}",
        )
        for k in range(num_sources)
    ]
    if weights is None:
        weights = [1.0 / num_sources] * num_sources
    return build_mixture_target(sources, weights)


def source_optimal_actions(suite: TransferSuite) -> list[np.ndarray]:
    """Correct-action tables of every comblock task in a suite, target last."""
    return [optimal_actions_of(task) for task in suite.tasks]
