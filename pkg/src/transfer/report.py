"""
Transfer reports and their JSON/CSV export.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from src.constants import DEFAULTS, FILES, LOGGER_NAME
from src.features.decoders import FeatureMap
from src.features.mle import StepSelection
from src.lsvi.trace import RegretTrace
from src.mdp.access import AccessCounter

logger = logging.getLogger(LOGGER_NAME)


def finite_or_none(value: float) -> float | None:
    return float(value) if math.isfinite(value) else None


@dataclass(eq=False)
class TransferReport:
    """Outcome of one pipeline run on one suite.

    Attributes:
        algorithm: Pipeline name.
        suite: Suite name.
        phi: Features used for deployment.
        trace: Deployment regret trace.
        episodes_to_solve: Target episodes counted until the solve streak began, or ``inf``.
        selections: MLE selections behind ``phi``, when learned.
        access: Interaction counters per environment handle.
        confusion: ``P(label | latent)`` of ``phi`` on the target, per step.
        span_tv: Sup-policy TV of the span-combined model, when coefficients exist.
        coverage: True-feature coverage of each source's exploratory policy.
        details: Extra per-pipeline records.
    """
    algorithm: str
    suite: str
    phi: FeatureMap
    trace: RegretTrace
    episodes_to_solve: float = math.inf
    selections: list[StepSelection] = field(default_factory=list)
    access: dict[str, AccessCounter] = field(default_factory=dict)
    confusion: list[np.ndarray] = field(default_factory=list)
    span_tv: float | None = None
    coverage: list[list[float]] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return math.isfinite(self.episodes_to_solve)

    @property
    def ties(self) -> list[int]:
        return [s.h for s in self.selections if s.is_tie]

    def source_access(self) -> AccessCounter:
        """Total interactions with every environment except the target."""
        total = AccessCounter()
        for name, counter in self.access.items():
            if name != "target":
                total = total.merged(counter)
        return total

    def confusion_frame(self) -> pd.DataFrame:
        """Row-major confusion table with columns ``h, latent, label, probability``."""
        records = [
            {"h": h, "latent": z, "label": l, "probability": float(matrix[z, l])}
            for h, matrix in enumerate(self.confusion)
            for z in range(matrix.shape[0])
            for l in range(matrix.shape[1])
        ]
        return pd.DataFrame.from_records(records, columns=["h", "latent", "label", "probability"])

    def to_document(self) -> dict[str, Any]:
        return {
            "format_version": DEFAULTS.DOCUMENT_VERSION,
            "algorithm": self.algorithm,
            "suite": self.suite,
            "solved": self.solved,
            "episodes_to_solve": finite_or_none(self.episodes_to_solve),
            "phi": self.phi.to_document(),
            "selections": [
                {"h": s.h, "index": s.index, "log_likelihood": s.log_likelihood, "tied": list(s.tied),
                 "no_data": s.no_data}
                for s in self.selections
            ],
            "ties": self.ties,
            "access": {name: counter.as_dict() for name, counter in self.access.items()},
            "span_tv": self.span_tv,
            "coverage": self.coverage,
            "regret": self.trace.summary() | {"episodes_to_solve": finite_or_none(self.trace.episodes_to_solve)},
            "details": self.details,
        }

    def write(self, directory: Path) -> list[Path]:
        """Write the report, its regret trace and its confusion table into ``directory``."""
        directory.mkdir(parents=True, exist_ok=True)
        report_path = directory / FILES.REPORT
        regret_path = directory / FILES.REGRET
        confusion_path = directory / FILES.CONFUSION
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(self.to_document(), f, indent=2, sort_keys=True)
        self.trace.to_csv(str(regret_path))
        self.confusion_frame().to_csv(confusion_path, index=False)
        logger.info(f"Report written to {report_path}")
        return [report_path, regret_path, confusion_path]
