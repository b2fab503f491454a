"""Experiment command handlers: run and validate-config."""
from __future__ import annotations

import argparse
import json
import logging

from src.config import ConfigHandler
from src.constants import EXIT
from src.harness.manifest import config_hash
from src.harness.runner import run_experiment
from src.models.settings import ExperimentConfig


def load_experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """Build the validated configuration from a file, the environment and CLI flags.

    Raises:
        ConfigError: If the configuration is missing keys, has unknown ones or fails validation.
    """
    handler = ConfigHandler(args.config, args.overrides)
    if args.jobs is not None:
        handler.set_value("experiment", "jobs", args.jobs)
    if args.output_root is not None:
        handler.set_value("experiment", "output_root", args.output_root)
    return handler.get_experiment_config()


def run_validate_config(args: argparse.Namespace, logger: logging.Logger) -> int:
    """Validate the configuration and log its resolved form.

    Returns:
        Exit code.
    """
    config = load_experiment_config(args)
    logger.info(f"Configuration {config.name} is valid (hash {config_hash(config)[:12]})")
    logger.debug(json.dumps(config.to_document(), indent=2, sort_keys=True))
    return EXIT.OK


def run_experiment_command(args: argparse.Namespace, logger: logging.Logger) -> int:
    """Run the configured experiment.

    Args:
        args: Parsed arguments namespace.
        logger: Logger instance.

    Returns:
        ``EXIT.OK``, or ``EXIT.SEED_FAILURE`` when any seed failed.
    """
    config = load_experiment_config(args)
    logger.info(
        f"Running {config.experiment.algorithm} on {config.suite.family} "
        f"with seeds {config.experiment.seeds}"
    )
    manifest = run_experiment(config, verbose=args.verbose)
    return EXIT.SEED_FAILURE if manifest.failures else EXIT.OK
