"""
Settings models for representation transfer experiments.
"""
from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any

from src.constants import ALGORITHMS, DEFAULTS, EMISSION, FAMILIES, LOGGER_NAME
from src.errors import ConfigError

logger = logging.getLogger(LOGGER_NAME)


def default_jobs() -> int:
    """Worker count when none is configured: the number of logical cores."""
    return os.cpu_count() or 1


@dataclass
class SuiteSettings:
    """Which suite to build and at what size."""
    family: str = FAMILIES.SHARED_EMISSION
    num_sources: int = 5
    horizon: int = 6
    num_actions: int = 4
    emission_mode: str = EMISSION.DECODABLE
    noise_scale: float = DEFAULTS.NOISE_SCALE
    codewords_per_latent: int = DEFAULTS.CODEWORDS_PER_LATENT
    weights: list[float] | None = None

    def __post_init__(self) -> None:
        """Validate settings after initialization."""
        self._validate()

    def _validate(self) -> None:
        """Validate suite settings."""
        if self.family not in FAMILIES.all():
            raise ConfigError(f"Unknown suite family: {self.family!r}, expected one of {FAMILIES.all()}")
        if self.emission_mode not in (EMISSION.DECODABLE, EMISSION.NOISY):
            raise ConfigError(f"Unknown emission mode: {self.emission_mode!r}")
        if self.num_sources < 1:
            raise ConfigError(f"Invalid num_sources value: {self.num_sources}")
        if self.horizon < 1:
            raise ConfigError(f"Invalid horizon value: {self.horizon}")
        if self.num_actions < 2:
            raise ConfigError(f"Invalid num_actions value: {self.num_actions}")
        if self.weights is not None and len(self.weights) != self.num_sources:
            raise ConfigError(f"Expected {self.num_sources} mixture weights, got {len(self.weights)}")
        if self.noise_scale < 0:
            logger.warning(f"Invalid noise_scale value: {self.noise_scale}, setting to {DEFAULTS.NOISE_SCALE}")
            object.__setattr__(self, "noise_scale", DEFAULTS.NOISE_SCALE)
        if self.codewords_per_latent < 1:
            logger.warning(
                f"Invalid codewords_per_latent value: {self.codewords_per_latent}, "
                f"setting to {DEFAULTS.CODEWORDS_PER_LATENT}"
            )
            object.__setattr__(self, "codewords_per_latent", DEFAULTS.CODEWORDS_PER_LATENT)


@dataclass
class BudgetSettings:
    """Episode and sample budgets."""
    n_rf: int = 3000
    n_lsvi: int = 2000
    n: int = 500
    t_deploy: int = 5000

    def __post_init__(self) -> None:
        """Validate settings after initialization."""
        self._validate()

    def _validate(self) -> None:
        """Every budget must be positive; model learning needs two episodes."""
        for name in ("n_rf", "n_lsvi", "n", "t_deploy"):
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"Budget {name} must be positive, got {value}")
        if self.n_rf < 2:
            raise ConfigError(f"Budget n_rf must be at least 2, got {self.n_rf}")


@dataclass
class BetaSettings:
    """Bonus scales of deployment and exploration."""
    deployment: float | None = None
    scale: float = 1.0
    sweep: list[float] = field(default_factory=list)
    eps_scale: float = 1.0
    lambda_scale: float = 1.0
    alpha_scale: float = 1.0

    def __post_init__(self) -> None:
        """Validate settings after initialization."""
        self._validate()

    def _validate(self) -> None:
        """Validate beta settings."""
        if self.deployment is not None and self.deployment < 0:
            raise ConfigError(f"Invalid deployment beta: {self.deployment}")
        if any(value < 0 for value in self.sweep):
            raise ConfigError(f"Beta sweep values must be non-negative, got {self.sweep}")
        for name in ("scale", "eps_scale", "lambda_scale", "alpha_scale"):
            if getattr(self, name) < 0:
                logger.warning(f"Invalid {name} value: {getattr(self, name)}, setting to 1.0")
                object.__setattr__(self, name, 1.0)

    def sweep_points(self) -> list[float | None]:
        """Deployment betas to run; ``[deployment]`` when no sweep is configured."""
        return list(self.sweep) if self.sweep else [self.deployment]


@dataclass
class EvaluationSettings:
    """When a deployment counts as solved."""
    stop_when_solved: bool = True
    solve_interval: int = DEFAULTS.SOLVE_INTERVAL
    solve_runs: int = DEFAULTS.SOLVE_RUNS
    solve_consecutive: int = DEFAULTS.SOLVE_CONSECUTIVE

    def __post_init__(self) -> None:
        """Validate settings after initialization."""
        self._validate()

    def _validate(self) -> None:
        """Validate evaluation settings."""
        if self.solve_interval < 1:
            logger.warning(f"Invalid solve_interval value: {self.solve_interval}, setting to {DEFAULTS.SOLVE_INTERVAL}")
            object.__setattr__(self, "solve_interval", DEFAULTS.SOLVE_INTERVAL)
        if self.solve_runs < 1:
            logger.warning(f"Invalid solve_runs value: {self.solve_runs}, setting to {DEFAULTS.SOLVE_RUNS}")
            object.__setattr__(self, "solve_runs", DEFAULTS.SOLVE_RUNS)
        if self.solve_consecutive < 1:
            logger.warning(
                f"Invalid solve_consecutive value: {self.solve_consecutive}, setting to {DEFAULTS.SOLVE_CONSECUTIVE}"
            )
            object.__setattr__(self, "solve_consecutive", DEFAULTS.SOLVE_CONSECUTIVE)


@dataclass
class AlgorithmSettings:
    """Which pipeline runs, on which seeds, and where results go."""
    algorithm: str = ALGORITHMS.GENERATIVE
    delta: float = 0.1
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    jobs: int = field(default_factory=default_jobs)
    output_root: str = "out"
    name: str = ""
    oracle_exploration: bool = False

    def __post_init__(self) -> None:
        """Validate settings after initialization."""
        self._validate()

    def _validate(self) -> None:
        """Validate algorithm settings."""
        if self.algorithm not in ALGORITHMS.all():
            raise ConfigError(f"Unknown algorithm: {self.algorithm!r}, expected one of {ALGORITHMS.all()}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.seeds:
            raise ConfigError("The seed list must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"Duplicate seeds: {self.seeds}")
        if self.jobs <= 0:
            jobs = default_jobs()
            logger.warning(f"Invalid jobs value: {self.jobs}, setting to {jobs}")
            object.__setattr__(self, "jobs", jobs)


@dataclass
class ExperimentConfig:
    """A complete, validated experiment."""
    suite: SuiteSettings = field(default_factory=SuiteSettings)
    budgets: BudgetSettings = field(default_factory=BudgetSettings)
    beta: BetaSettings = field(default_factory=BetaSettings)
    evaluation: EvaluationSettings = field(default_factory=EvaluationSettings)
    experiment: AlgorithmSettings = field(default_factory=AlgorithmSettings)

    @property
    def name(self) -> str:
        """Experiment name, derived from the algorithm and suite when not set."""
        if self.experiment.name:
            return self.experiment.name
        return (
            f"{self.experiment.algorithm}-{self.suite.family}"
            f"-K{self.suite.num_sources}-H{self.suite.horizon}-A{self.suite.num_actions}"
        )

    def to_document(self) -> dict[str, Any]:
        """Plain nested dictionary, the same shape as the TOML file."""
        return {
            "experiment": asdict(self.experiment),
            "suite": asdict(self.suite),
            "budgets": asdict(self.budgets),
            "beta": asdict(self.beta),
            "evaluation": asdict(self.evaluation),
        }

    @classmethod
    def from_document(cls, document: dict[str, Any]) -> "ExperimentConfig":
        return cls(
            suite=SuiteSettings(**document.get("suite", {})),
            budgets=BudgetSettings(**document.get("budgets", {})),
            beta=BetaSettings(**document.get("beta", {})),
            evaluation=EvaluationSettings(**document.get("evaluation", {})),
            experiment=AlgorithmSettings(**document.get("experiment", {})),
        )
