"""
Decoder candidates, one-hot feature maps and finite hypothesis classes.

A decoder relabels codeword groups: observations of one group always share
a label. Labelings are kept in canonical form (labels numbered by first
appearance), since one-hot features do not depend on label names.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from src.constants import DEFAULTS, LOGGER_NAME
from src.errors import DimensionMismatch, InvalidParameter
from src.mdp.layout import ObservationLayout, StepLayout

logger = logging.getLogger(LOGGER_NAME)


def canonical_labels(labels: np.ndarray | list[int]) -> np.ndarray:
    """Renumber labels in order of first appearance."""
    mapping: dict[int, int] = {}
    out = np.empty(len(labels), dtype=np.int64)
    for i, label in enumerate(labels):
        out[i] = mapping.setdefault(int(label), len(mapping))
    return out


@dataclass(frozen=True, eq=False)
class DecoderCandidate:
    """Labeling of the codeword groups of one step."""
    labels: np.ndarray
    num_labels: int

    @classmethod
    def from_labels(cls, labels: np.ndarray | list[int], canonical: bool = True) -> "DecoderCandidate":
        array = canonical_labels(labels) if canonical else np.asarray(labels, dtype=np.int64)
        return cls(labels=array, num_labels=int(array.max()) + 1)

    def same_partition(self, other: "DecoderCandidate") -> bool:
        return np.array_equal(canonical_labels(self.labels), canonical_labels(other.labels))

    def one_hot(self) -> np.ndarray:
        """Group-to-label assignment matrix of shape ``(G, L)``."""
        matrix = np.zeros((self.labels.size, self.num_labels))
        matrix[np.arange(self.labels.size), self.labels] = 1.0
        return matrix


class FeatureMap:
    """One-hot features ``phi_h(s, a) = e(label_h(s), a)``."""

    def __init__(self, layout: ObservationLayout, num_actions: int, decoders: list[DecoderCandidate]) -> None:
        if len(decoders) != layout.horizon:
            raise DimensionMismatch(f"need {layout.horizon} decoders, got {len(decoders)}")
        for h, decoder in enumerate(decoders):
            if decoder.labels.shape != (layout.num_groups(h),):
                raise DimensionMismatch(f"decoder {h} must label {layout.num_groups(h)} groups")
        self.layout = layout
        self.num_actions = num_actions
        self.decoders = list(decoders)
        self._tensors: dict[int, np.ndarray] = {}

    @classmethod
    def from_labels(
        cls, layout: ObservationLayout, num_actions: int, labels: list[np.ndarray], canonical: bool = True
    ) -> "FeatureMap":
        return cls(layout, num_actions, [DecoderCandidate.from_labels(l, canonical) for l in labels])

    @classmethod
    def ground_truth(cls, layout: ObservationLayout, num_actions: int) -> "FeatureMap":
        """Features of the true decoder, labels equal to latent ids."""
        labels = [layout.step(h).group_latent for h in range(layout.horizon)]
        return cls.from_labels(layout, num_actions, labels, canonical=False)

    @classmethod
    def constant(cls, layout: ObservationLayout, num_actions: int) -> "FeatureMap":
        """Features that ignore the observation."""
        labels = [np.zeros(layout.num_groups(h), dtype=np.int64) for h in range(layout.horizon)]
        return cls.from_labels(layout, num_actions, labels)

    @property
    def horizon(self) -> int:
        return self.layout.horizon

    def labels(self, h: int) -> np.ndarray:
        return self.decoders[h].labels

    def num_labels(self, h: int) -> int:
        return self.decoders[h].num_labels

    def dimension(self, h: int) -> int:
        return self.decoders[h].num_labels * self.num_actions

    @property
    def max_dimension(self) -> int:
        return max(self.dimension(h) for h in range(self.horizon))

    def index(self, h: int, obs: int) -> int:
        """Label assigned to ``obs`` at step ``h``."""
        return int(self.decoders[h].labels[self.layout.group(h, obs)])

    def phi(self, h: int, obs: int, action: int) -> np.ndarray:
        vector = np.zeros(self.dimension(h))
        vector[self.index(h, obs) * self.num_actions + action] = 1.0
        return vector

    def feature_tensor(self, h: int) -> np.ndarray:
        """Features of every ``(group, action)`` at step ``h``, shape ``(G_h, A, d_h)``."""
        if h not in self._tensors:
            labels = self.decoders[h].labels
            A = self.num_actions
            tensor = np.zeros((labels.size, A, self.dimension(h)))
            for a in range(A):
                tensor[np.arange(labels.size), a, labels * A + a] = 1.0
            self._tensors[h] = tensor
        return self._tensors[h]

    def observation_tensor(self, h: int) -> np.ndarray:
        """Features of every ``(observation, action)``, shape ``(O_h, A, d_h)``."""
        return self.feature_tensor(h)[self.layout.step(h).group_of]

    def same_partition(self, other: "FeatureMap") -> bool:
        return all(mine.same_partition(theirs) for mine, theirs in zip(self.decoders, other.decoders))

    def to_document(self) -> dict[str, Any]:
        return {"labels": [d.labels.tolist() for d in self.decoders], "num_actions": self.num_actions}


def stirling_count(items: int, max_labels: int) -> int:
    """Number of partitions of ``items`` elements into at most ``max_labels`` non-empty parts."""
    table = [[0] * (max_labels + 1) for _ in range(items + 1)]
    table[0][0] = 1
    for n in range(1, items + 1):
        for k in range(1, max_labels + 1):
            table[n][k] = k * table[n - 1][k] + table[n - 1][k - 1]
    return sum(table[items][1:])


def restricted_growth_strings(length: int, max_labels: int) -> Iterator[tuple[int, ...]]:
    """All canonical labelings of ``length`` groups with at most ``max_labels`` labels."""
    def extend(prefix: list[int], top: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for label in range(min(top + 2, max_labels)):
            prefix.append(label)
            yield from extend(prefix, max(top, label))
            prefix.pop()
    yield from extend([0], 0)


def block_bijections(step: StepLayout) -> Iterator[np.ndarray]:
    """Labelings that permute latent labels independently inside every block but the first."""
    num_latents = step.num_latents
    blocks = [np.flatnonzero(step.group_block == b) for b in range(step.num_blocks)]
    for block in blocks:
        if sorted(step.group_latent[block].tolist()) != list(range(num_latents)):
            raise InvalidParameter("block-aligned candidates need one group per latent in every block")
    for perms in itertools.product(itertools.permutations(range(num_latents)), repeat=len(blocks) - 1):
        labels = step.group_latent.copy()
        for block, perm in zip(blocks[1:], perms):
            labels[block] = np.array(perm)[step.group_latent[block]]
        yield labels


class HypothesisClass:
    """Per-step finite lists of decoder candidates.

    Attributes:
        candidates: ``candidates[h]`` lists the decoders allowed at step ``h``.
        realizable: Whether the true decoder is a member at every step.
    """

    def __init__(
        self,
        layout: ObservationLayout,
        num_actions: int,
        candidates: list[list[DecoderCandidate]],
        realizable: bool = False,
    ) -> None:
        if len(candidates) != layout.horizon or any(not c for c in candidates):
            raise InvalidParameter("every step needs at least one decoder candidate")
        self.layout = layout
        self.num_actions = num_actions
        self.candidates = candidates
        self.realizable = realizable

    @property
    def size_phi(self) -> int:
        """Largest per-step class size."""
        return max(len(c) for c in self.candidates)

    def contains(self, h: int, decoder: DecoderCandidate) -> bool:
        return any(decoder.same_partition(c) for c in self.candidates[h])

    def finest(self, h: int) -> int:
        """Index of the first candidate with the most labels at step ``h``."""
        sizes = [c.num_labels for c in self.candidates[h]]
        return int(np.argmax(sizes))

    def feature_map(self, indices: list[int]) -> FeatureMap:
        """Assemble the feature map choosing ``indices[h]`` at each step."""
        return FeatureMap(self.layout, self.num_actions, [self.candidates[h][i] for h, i in enumerate(indices)])

    @classmethod
    def from_labelings(
        cls,
        layout: ObservationLayout,
        num_actions: int,
        labelings: list[list[np.ndarray]],
    ) -> "HypothesisClass":
        """Class made of whole-horizon labelings; duplicate partitions per step are merged."""
        truth = FeatureMap.ground_truth(layout, num_actions)
        candidates: list[list[DecoderCandidate]] = []
        for h in range(layout.horizon):
            step: list[DecoderCandidate] = []
            for labeling in labelings:
                decoder = DecoderCandidate.from_labels(labeling[h])
                if not any(decoder.same_partition(c) for c in step):
                    step.append(decoder)
            candidates.append(step)
        hclass = cls(layout, num_actions, candidates)
        hclass.realizable = all(hclass.contains(h, truth.decoders[h]) for h in range(layout.horizon))
        return hclass


def build_decoder_class(
    layout: ObservationLayout,
    num_actions: int,
    rng: np.random.Generator,
    max_candidates: int = DEFAULTS.MAX_DECODER_CANDIDATES,
) -> HypothesisClass:
    """Enumerate the decoders of every step, in a random order.

    All canonical labelings with at most as many labels as latents are used
    when there are at most ``max_candidates`` of them; otherwise the class
    falls back to block-aligned relabelings, truncated if needed. The true
    decoder is always kept.
    """
    if max_candidates < 1:
        raise InvalidParameter("max_candidates must be positive")
    truth = FeatureMap.ground_truth(layout, num_actions)
    candidates: list[list[DecoderCandidate]] = []
    for h in range(layout.horizon):
        step = layout.step(h)
        true_decoder = DecoderCandidate.from_labels(step.group_latent)
        if stirling_count(step.num_groups, step.num_latents) <= max_candidates:
            labelings = [np.array(s) for s in restricted_growth_strings(step.num_groups, step.num_latents)]
        else:
            labelings = list(itertools.islice(block_bijections(step), max_candidates))
            logger.warning(
                f"Step {h}: {step.num_groups} groups give too many labelings; "
                f"using {len(labelings)} block-aligned candidates"
            )
        decoders = [DecoderCandidate.from_labels(l) for l in labelings]
        if not any(true_decoder.same_partition(d) for d in decoders):
            decoders[-1] = true_decoder
        order = rng.permutation(len(decoders))
        candidates.append([decoders[i] for i in order])
    hclass = HypothesisClass(layout, num_actions, candidates)
    hclass.realizable = all(hclass.contains(h, truth.decoders[h]) for h in range(layout.horizon))
    logger.debug(f"Decoder class sizes per step: {[len(c) for c in candidates]}")
    return hclass
