"""Summary command handler."""
from __future__ import annotations

import argparse
import logging
from pathlib import Path

from src.constants import EXIT
from src.harness.manifest import RunManifest
from src.harness.summary import emit_summary, summary_frame, summary_table


def run_summarize(args: argparse.Namespace, logger: logging.Logger) -> int:
    """Merge the manifests of finished experiments into one summary table.

    Returns:
        Exit code.
    """
    manifests = [RunManifest.load(Path(path)) for path in args.experiments]
    for manifest in manifests:
        broken = manifest.verify()
        if broken:
            logger.warning(f"{manifest.name}: missing or unreadable files: {', '.join(broken)}")
    emit_summary(manifests, Path(args.output))
    logger.info("\n" + summary_table(summary_frame(manifests)))
    return EXIT.OK
