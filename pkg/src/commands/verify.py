"""Lower-bound verification command handler."""
from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path

from src.constants import EXIT
from src.envs.lower_bound import build_lower_bound_family
from src.seeding import named_stream
from src.transfer.verifier import lower_bound_demo

GAP_TOLERANCE = 1e-9
EXPECTED_PERMUTED_GAP = 0.5


def run_verify_lower_bound(args: argparse.Namespace, logger: logging.Logger) -> int:
    """Check both decoders' exact gaps and compare the online and cross-sampled fits.

    Returns:
        ``EXIT.OK`` when the correct decoder has no gap and the permuted one loses exactly 1/2.
    """
    family = build_lower_bound_family()
    demo = lower_bound_demo(family, args.samples, named_stream(args.seed, "learner"))
    document = demo.to_document()
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f, indent=2, sort_keys=True)
        logger.info(f"Lower-bound result written to {path}")

    holds = (
        abs(demo.gaps["correct"]) <= GAP_TOLERANCE
        and abs(demo.gaps["permuted"] - EXPECTED_PERMUTED_GAP) <= GAP_TOLERANCE
    )
    if holds:
        logger.info("Lower bound verified: correct decoder gap 0, permuted decoder gap 1/2")
        return EXIT.OK
    logger.error(f"Lower bound check failed: gaps {demo.gaps}")
    return EXIT.SEED_FAILURE
