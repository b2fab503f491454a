"""
Run manifests: what an experiment wrote and how many interactions it used.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd
from PIL import Image

from src.constants import DEFAULTS, FILES, LOGGER_NAME
from src.errors import ConfigError
from src.mdp.access import AccessCounter
from src.models.settings import ExperimentConfig

logger = logging.getLogger(LOGGER_NAME)

# Keys that change where or how fast a run executes but never its results.
UNHASHED_KEYS = ("jobs", "output_root")

STATUS_OK = "ok"
STATUS_FAILED = "failed"


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON form of the result-relevant configuration."""
    document = config.to_document()
    for key in UNHASHED_KEYS:
        document["experiment"].pop(key, None)
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class SeedRecord:
    """Outcome of one (seed, beta) run."""
    seed: int
    status: str
    beta: float | None = None
    episodes_to_solve: float | None = None
    files: list[str] = field(default_factory=list)
    access: dict[str, dict[str, int]] = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def solved(self) -> bool:
        return self.ok and self.episodes_to_solve is not None


@dataclass
class RunManifest:
    """Everything ``run_experiment`` produced for one configuration.

    Attributes:
        name: Experiment name.
        algorithm: Pipeline that was run.
        suite: Suite name, or the family when every seed failed before building it.
        config_hash: Hash of the result-relevant configuration.
        version: Package version that produced the files.
        records: One record per (seed, beta) run.
        wall_clock: Seconds spent, the only field that differs between reruns.
        config: The configuration document.
    """
    name: str
    algorithm: str
    suite: str
    config_hash: str
    version: str
    records: list[SeedRecord] = field(default_factory=list)
    wall_clock: float = 0.0
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def failures(self) -> list[SeedRecord]:
        return [r for r in self.records if not r.ok]

    def access_totals(self) -> dict[str, int]:
        """Interaction counts summed over every handle of every run."""
        total = AccessCounter()
        for record in self.records:
            for counts in record.access.values():
                total = total.merged(AccessCounter(**counts))
        return total.as_dict()

    def files(self) -> list[str]:
        return [path for record in self.records for path in record.files]

    def to_document(self) -> dict[str, Any]:
        return {
            "format_version": DEFAULTS.DOCUMENT_VERSION,
            "kind": "run_manifest",
            "name": self.name,
            "algorithm": self.algorithm,
            "suite": self.suite,
            "config_hash": self.config_hash,
            "version": self.version,
            "wall_clock": self.wall_clock,
            "access_totals": self.access_totals(),
            "records": [asdict(r) for r in self.records],
            "config": self.config,
        }

    @classmethod
    def from_document(cls, document: dict[str, Any]) -> "RunManifest":
        version = document.get("format_version")
        if version != DEFAULTS.DOCUMENT_VERSION or document.get("kind") != "run_manifest":
            raise ConfigError(f"unsupported manifest document (version {version})")
        return cls(
            name=document["name"],
            algorithm=document["algorithm"],
            suite=document["suite"],
            config_hash=document["config_hash"],
            version=document["version"],
            records=[SeedRecord(**r) for r in document.get("records", [])],
            wall_clock=document.get("wall_clock", 0.0),
            config=document.get("config", {}),
        )

    def write(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / FILES.MANIFEST
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_document(), f, indent=2, sort_keys=True)
        logger.info(f"Manifest written to {path}")
        return path

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        """Load a manifest from a file or from the experiment directory holding it."""
        if path.is_dir():
            path = path / FILES.MANIFEST
        try:
            with open(path, "r", encoding="utf-8") as f:
                return cls.from_document(json.load(f))
        except FileNotFoundError as e:
            raise ConfigError(f"Manifest not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in manifest {path}: {e}") from e

    def verify(self) -> list[str]:
        """Return the listed files that are missing or do not parse."""
        broken = []
        for name in self.files():
            if not _parses(Path(name)):
                broken.append(name)
        if broken:
            logger.warning(f"Manifest {self.name}: {len(broken)} unreadable files")
        return broken


def _parses(path: Path) -> bool:
    if not path.is_file():
        return False
    try:
        if path.suffix == ".json":
            with open(path, "r", encoding="utf-8") as f:
                json.load(f)
        elif path.suffix == ".csv":
            pd.read_csv(path)
        elif path.suffix == ".png":
            with Image.open(path) as image:
                image.verify()
    except (ValueError, OSError, pd.errors.ParserError):
        return False
    return True
