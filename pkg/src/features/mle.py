"""
Single- and multi-task maximum-likelihood representation learning.

For a fixed decoder the likelihood is maximized in closed form by the
smoothed count estimate, so the search over the hypothesis class is an
outer enumeration of decoder candidates, one step at a time. The step-``h``
likelihood only involves the step-``h`` decoder: next states enter through
their codeword group, and the within-group emission term is the same for
every candidate.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import xlogy

from src.constants import DEFAULTS, LOGGER_NAME
from src.errors import EmptyDataset, InvalidParameter, LikelihoodDegenerate, MismatchedTasks
from src.features.datasets import TransitionCounts, TransitionDataset
from src.features.decoders import FeatureMap, HypothesisClass
from src.features.models import LinearMdpModel, aggregate_labels

logger = logging.getLogger(LOGGER_NAME)

CANDIDATE_CHUNK = 512


@dataclass(frozen=True, eq=False)
class StepSelection:
    """Decoder chosen at one step.

    Attributes:
        h: Step index.
        index: Position of the chosen candidate in the class.
        log_likelihood: Log-likelihood of the chosen candidate.
        tied: Indices of every candidate within tolerance of the best, chosen one included.
        no_data: True when no transition left this step and the finest candidate was used.
        log_likelihoods: Log-likelihood of every candidate, empty when ``no_data``.
    """
    h: int
    index: int
    log_likelihood: float
    tied: tuple[int, ...] = ()
    no_data: bool = False
    log_likelihoods: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def is_tie(self) -> bool:
        return len(self.tied) > 1


@dataclass(eq=False)
class MultitaskFit:
    """Shared features and one count-based model per task."""
    phi: FeatureMap
    models: list[LinearMdpModel]
    selections: list[StepSelection]
    counts: TransitionCounts

    @property
    def ties(self) -> list[StepSelection]:
        return [s for s in self.selections if s.is_tie]

    @property
    def indices(self) -> list[int]:
        return [s.index for s in self.selections]


def candidate_log_likelihoods(
    stacked: np.ndarray,
    hclass: HypothesisClass,
    h: int,
    smoothing: float = DEFAULTS.SMOOTHING,
) -> np.ndarray:
    """Profile log-likelihood of every step-``h`` candidate.

    Args:
        stacked: Group counts of every task, shape ``(K, G_h, A, G_{h+1})``.
        hclass: Hypothesis class.
        h: Step index.
        smoothing: Additive smoothing per transition cell.

    Returns:
        One log-likelihood per candidate, summed over tasks.
    """
    candidates = hclass.candidates[h]
    num_next = stacked.shape[3]
    max_labels = max(c.num_labels for c in candidates)
    scores = np.empty(len(candidates))
    for start in range(0, len(candidates), CANDIDATE_CHUNK):
        chunk = candidates[start:start + CANDIDATE_CHUNK]
        one_hot = np.zeros((len(chunk), stacked.shape[1], max_labels))
        for c, candidate in enumerate(chunk):
            one_hot[c, np.arange(candidate.labels.size), candidate.labels] = 1.0
        counts = np.einsum("cgl,kgaj->cklaj", one_hot, stacked)
        rows = counts.sum(axis=4)
        cell_terms = xlogy(counts, counts + smoothing).sum(axis=(1, 2, 3, 4))
        row_terms = xlogy(rows, rows + smoothing * num_next).sum(axis=(1, 2, 3))
        scores[start:start + len(chunk)] = cell_terms - row_terms
    return scores


def select_decoders(
    counts: TransitionCounts,
    hclass: HypothesisClass,
    smoothing: float = DEFAULTS.SMOOTHING,
) -> list[StepSelection]:
    """Pick the maximum-likelihood decoder of every step.

    Ties within ``1e-9 * max(1, |best|)`` go to the lowest candidate index.

    Raises:
        LikelihoodDegenerate: If no candidate has a finite likelihood.
    """
    selections = []
    for h in range(hclass.layout.horizon):
        if h == hclass.layout.horizon - 1 or counts.total(h) == 0:
            selections.append(StepSelection(h=h, index=hclass.finest(h), log_likelihood=0.0, no_data=True))
            continue
        scores = candidate_log_likelihoods(counts.stacked(h), hclass, h, smoothing)
        best = float(np.max(scores))
        if not math.isfinite(best):
            raise LikelihoodDegenerate(f"every candidate at step {h} has zero likelihood")
        tolerance = DEFAULTS.TIE_TOLERANCE * max(1.0, abs(best))
        tied = tuple(int(i) for i in np.flatnonzero(scores >= best - tolerance))
        selections.append(StepSelection(
            h=h, index=tied[0], log_likelihood=float(scores[tied[0]]), tied=tied, log_likelihoods=scores,
        ))
    return selections


def fit_task_models(
    counts: TransitionCounts,
    phi: FeatureMap,
    selections: list[StepSelection] | tuple[StepSelection, ...] = (),
    smoothing: float = DEFAULTS.SMOOTHING,
) -> list[LinearMdpModel]:
    """Closed-form per-task models for a fixed feature map."""
    models = []
    for k in range(counts.num_tasks):
        transitions = tuple(
            aggregate_labels(phi.labels(h), phi.num_labels(h), counts.transitions[k][h])
            for h in range(phi.horizon - 1)
        )
        models.append(LinearMdpModel(
            phi=phi,
            transition_counts=transitions,
            observation_counts=tuple(o.copy() for o in counts.observations[k]),
            smoothing=smoothing,
            selections=tuple(selections),
        ))
    return models


def fit_counts(
    counts: TransitionCounts,
    hclass: HypothesisClass,
    smoothing: float = DEFAULTS.SMOOTHING,
) -> MultitaskFit:
    """Select shared decoders and fit per-task models on accumulated counts."""
    selections = select_decoders(counts, hclass, smoothing)
    phi = hclass.feature_map([s.index for s in selections])
    ties = [s for s in selections if s.is_tie]
    if ties:
        logger.warning(
            f"Likelihood ties at steps {[s.h for s in ties]}: "
            f"{[len(s.tied) for s in ties]} equally likely decoders, lowest index kept"
        )
    return MultitaskFit(phi=phi, models=fit_task_models(counts, phi, selections, smoothing),
                        selections=selections, counts=counts)


def mle_multitask(
    datasets: list[TransitionDataset],
    hclass: HypothesisClass,
    num_tasks: int | None = None,
    smoothing: float = DEFAULTS.SMOOTHING,
) -> MultitaskFit:
    """Shared-feature MLE over cross-sampled or on-policy datasets.

    Every tuple is scored with the embedding of the task that generated its
    next state, so ``D_{ij}`` contributes to task ``i``.

    Args:
        datasets: ``K^2`` cross datasets or ``K`` on-policy datasets.
        hclass: Decoder candidates per step.
        num_tasks: Number of tasks; inferred from the datasets when omitted.
        smoothing: Additive smoothing per transition cell.

    Returns:
        The selected features with one model per task.

    Raises:
        EmptyDataset: If the datasets hold no tuples.
        MismatchedTasks: If a dataset refers to a task index ``>= num_tasks``.
    """
    if not datasets:
        raise EmptyDataset("no datasets were supplied")
    inferred = 1 + max(max(d.task_pair) for d in datasets)
    if num_tasks is None:
        num_tasks = inferred
    elif inferred > num_tasks:
        raise MismatchedTasks(f"datasets refer to task {inferred - 1} but only {num_tasks} tasks exist")
    counts = TransitionCounts.from_datasets(datasets, hclass.layout, hclass.num_actions, num_tasks)
    fit = fit_counts(counts, hclass, smoothing)
    logger.info(
        f"Multi-task MLE over {num_tasks} tasks and {int(counts.total())} tuples selected "
        f"candidates {fit.indices}"
    )
    return fit


def mle_single_task(
    datasets: list[TransitionDataset],
    hclass: HypothesisClass,
    smoothing: float = DEFAULTS.SMOOTHING,
) -> LinearMdpModel:
    """Single-task MLE: every tuple is treated as coming from one task."""
    pooled = [replace(d, task_pair=(0, 0)) for d in datasets]
    return mle_multitask(pooled, hclass, num_tasks=1, smoothing=smoothing).models[0]


def mle_bound_zeta(n: int, size_phi: float, size_upsilon: float, num_tasks: int, delta: float) -> float:
    """``(log(|Phi|/delta) + K log|Upsilon|) / n``.

    Raises:
        InvalidParameter: If ``n < 1``, ``delta`` is outside ``(0, 1)``, a class is empty or ``K < 0``.
    """
    if n < 1:
        raise InvalidParameter(f"n must be at least 1, got {n}")
    if not 0 < delta < 1:
        raise InvalidParameter(f"delta must lie in (0, 1), got {delta}")
    if size_phi < 1 or size_upsilon < 1 or num_tasks < 0:
        raise InvalidParameter("class sizes must be positive and the task count non-negative")
    return (math.log(size_phi / delta) + num_tasks * math.log(size_upsilon)) / n
