"""Decoder visualization command handler."""
from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path

import numpy as np

from src.constants import EXIT, FILES
from src.envs.suites import TransferSuite
from src.errors import ConfigError
from src.features.decoders import FeatureMap
from src.harness.viz import emit_decoder_viz
from src.seeding import named_stream


def _load_json(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Missing file: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}") from e


def run_viz(args: argparse.Namespace, logger: logging.Logger) -> int:
    """Rebuild a run's target and learned decoder, then write the decoder grids.

    Returns:
        Exit code.
    """
    run_dir = Path(args.run_dir)
    suite = TransferSuite.from_document(_load_json(run_dir / FILES.SUITE))
    phi_document = _load_json(run_dir / FILES.REPORT)["phi"]
    target = suite.target
    phi = FeatureMap.from_labels(
        target.layout, phi_document["num_actions"],
        [np.asarray(labels) for labels in phi_document["labels"]], canonical=False,
    )
    output = Path(args.output) if args.output else run_dir / FILES.VIZ_DIR
    viz = emit_decoder_viz(phi, target, range(target.horizon), named_stream(args.seed, "viz"), directory=output)
    logger.info(f"Decoder grids written to {output}; {len(viz.collapses)} collapses")
    return EXIT.OK
