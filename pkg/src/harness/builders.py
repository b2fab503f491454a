"""
Build suites and decoder classes from experiment settings.
"""
from __future__ import annotations

import logging

import numpy as np

from src.constants import FAMILIES, LOGGER_NAME
from src.envs.comblock import build_comblock
from src.envs.suites import (
    TransferSuite,
    build_comblock_mixture_suite,
    build_partitioned_suite,
    build_shared_emission_suite,
)
from src.errors import ConfigError
from src.features.decoders import HypothesisClass, build_decoder_class
from src.models.settings import SuiteSettings

logger = logging.getLogger(LOGGER_NAME)


def single_task_suite(settings: SuiteSettings, rng: np.random.Generator) -> TransferSuite:
    """One comblock serving as its own only source."""
    env = build_comblock(
        settings.horizon,
        settings.num_actions,
        settings.emission_mode,
        rng=rng,
        codewords_per_latent=settings.codewords_per_latent,
        noise_scale=settings.noise_scale,
    )
    span = [np.ones((1, env.layout.num_obs(h + 1))) for h in range(env.horizon - 1)]
    return TransferSuite(
        sources=[env],
        target=env,
        span_coefficients=span,
        family=FAMILIES.COMBLOCK,
        name=f"{FAMILIES.COMBLOCK}-H{settings.horizon}-A{settings.num_actions}",
    )


def build_suite(settings: SuiteSettings, rng: np.random.Generator) -> TransferSuite:
    """Build the suite named by ``settings.family``.

    Raises:
        ConfigError: If the family is unknown.
    """
    if settings.family == FAMILIES.COMBLOCK:
        return single_task_suite(settings, rng)
    if settings.family == FAMILIES.SHARED_EMISSION:
        return build_shared_emission_suite(
            settings.num_sources, settings.horizon, rng, settings.num_actions,
            settings.emission_mode, settings.codewords_per_latent, settings.noise_scale,
        )
    if settings.family == FAMILIES.PARTITIONED:
        return build_partitioned_suite(
            settings.num_sources, settings.horizon, rng, settings.num_actions,
            settings.emission_mode, settings.codewords_per_latent, settings.noise_scale,
        )
    if settings.family == FAMILIES.MIXTURE:
        return build_comblock_mixture_suite(
            settings.num_sources, settings.horizon, rng, settings.num_actions,
            settings.weights, settings.emission_mode, settings.codewords_per_latent,
        )
    raise ConfigError(f"Unknown suite family: {settings.family!r}")


def build_hypothesis_class(suite: TransferSuite, rng: np.random.Generator) -> HypothesisClass:
    """Decoder candidates over the target's observation layout."""
    hclass = build_decoder_class(suite.target.layout, suite.num_actions, rng)
    if not hclass.realizable:
        logger.warning(f"Decoder class for {suite.name} does not contain the true decoder")
    return hclass
