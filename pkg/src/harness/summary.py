"""
Summary tables: episodes-to-solve per suite and algorithm, over seeds.
"""
from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

from src.constants import FILES, LOGGER_NAME
from src.errors import InvalidParameter
from src.harness.manifest import RunManifest, SeedRecord

logger = logging.getLogger(LOGGER_NAME)

INFINITY = "∞"
COLUMNS = ["suite", "algorithm", "seeds", "finite", "mean", "std", "cell"]


def seed_values(records: list[SeedRecord]) -> list[float]:
    """Episodes-to-solve per seed; failed or unsolved seeds count as infinite."""
    return [float(r.episodes_to_solve) if r.solved else math.inf for r in records]


def format_cell(values: list[float]) -> str:
    """``mean (std)`` over the finite values, or ``∞`` when most seeds never solved.

    The standard deviation is the population one. A finite cell built from
    fewer than all seeds is annotated with the finite fraction.
    """
    finite = [v for v in values if math.isfinite(v)]
    fraction = f"{len(finite)}/{len(values)}"
    if not finite or 2 * len(finite) < len(values):
        return f"{INFINITY} ({fraction})"
    cell = f"{np.mean(finite):.6g} ({np.std(finite):.2f})"
    if len(finite) < len(values):
        cell += f" [{fraction}]"
    return cell


def _column_label(manifest: RunManifest, beta: float | None, swept: bool) -> str:
    if not swept:
        return manifest.algorithm
    return f"{manifest.algorithm} beta={'default' if beta is None else f'{beta:g}'}"


def summary_frame(manifests: list[RunManifest]) -> pd.DataFrame:
    """One row per (suite, algorithm column) cell."""
    rows = []
    for manifest in manifests:
        betas = sorted({r.beta for r in manifest.records}, key=lambda b: (b is not None, b or 0.0))
        swept = len(betas) > 1
        for beta in betas:
            records = [r for r in manifest.records if r.beta == beta]
            values = seed_values(records)
            finite = [v for v in values if math.isfinite(v)]
            rows.append({
                "suite": manifest.suite,
                "algorithm": _column_label(manifest, beta, swept),
                "seeds": len(values),
                "finite": len(finite),
                "mean": float(np.mean(finite)) if finite else math.inf,
                "std": float(np.std(finite)) if finite else math.nan,
                "cell": format_cell(values),
            })
    return pd.DataFrame.from_records(rows, columns=COLUMNS)


def summary_table(frame: pd.DataFrame) -> str:
    """Aligned text table: suites as rows, algorithms as columns."""
    if frame.empty:
        return ""
    table = frame.pivot_table(index="suite", columns="algorithm", values="cell", aggfunc="first").fillna("")
    table.columns.name = None
    return table.to_string()


def emit_summary(manifests: list[RunManifest], directory: Path) -> list[Path]:
    """Write ``summary.csv`` and ``summary.txt`` for the given manifests.

    Args:
        manifests: At least one run manifest.
        directory: Where to write the tables.

    Returns:
        Paths of the CSV and the text table.
    """
    if not manifests:
        raise InvalidParameter("emit_summary needs at least one manifest")
    directory.mkdir(parents=True, exist_ok=True)
    frame = summary_frame(manifests)
    csv_path = directory / FILES.SUMMARY_CSV
    text_path = directory / FILES.SUMMARY_TEXT
    frame.to_csv(csv_path, index=False)
    with open(text_path, "w", encoding="utf-8") as f:
        f.write(summary_table(frame) + "\n")
    logger.info(f"Summary written to {csv_path}")
    return [csv_path, text_path]
