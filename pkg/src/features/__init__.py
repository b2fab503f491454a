"""
Decoder hypothesis classes, count-based models and maximum-likelihood selection.
"""
from src.features.datasets import TransitionCounts, TransitionDataset
from src.features.decoders import (
    DecoderCandidate,
    FeatureMap,
    HypothesisClass,
    build_decoder_class,
    canonical_labels,
)
from src.features.diagnostics import (
    decoder_confusion,
    embedding_norm_ratio,
    model_tv_error,
    span_model_tv,
    target_span_model,
)
from src.features.mle import (
    MultitaskFit,
    StepSelection,
    fit_counts,
    fit_task_models,
    mle_bound_zeta,
    mle_multitask,
    mle_single_task,
    select_decoders,
)
from src.features.models import EmissionEmbedding, LinearMdpModel, population_model

__all__ = [
    "DecoderCandidate",
    "EmissionEmbedding",
    "FeatureMap",
    "HypothesisClass",
    "LinearMdpModel",
    "MultitaskFit",
    "StepSelection",
    "TransitionCounts",
    "TransitionDataset",
    "build_decoder_class",
    "canonical_labels",
    "decoder_confusion",
    "embedding_norm_ratio",
    "fit_counts",
    "fit_task_models",
    "mle_bound_zeta",
    "mle_multitask",
    "mle_single_task",
    "model_tv_error",
    "population_model",
    "select_decoders",
    "span_model_tv",
    "target_span_model",
]
