"""
Configuration handler for representation transfer experiments.
"""
from __future__ import annotations

import copy
import logging
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import fields
from typing import Any, Mapping

from src.constants import ENV_VARS, LOGGER_NAME
from src.errors import ConfigError
from src.models.settings import (
    AlgorithmSettings,
    BetaSettings,
    BudgetSettings,
    EvaluationSettings,
    ExperimentConfig,
    SuiteSettings,
)

logger = logging.getLogger(LOGGER_NAME)

SECTIONS: dict[str, type] = {
    "experiment": AlgorithmSettings,
    "suite": SuiteSettings,
    "budgets": BudgetSettings,
    "beta": BetaSettings,
    "evaluation": EvaluationSettings,
}


def parse_override(assignment: str) -> tuple[str, str, Any]:
    """Split ``section.key=value`` into its parts, parsing the value as TOML.

    Dashes in the key are read as underscores, so ``budgets.n-rf=100`` works.
    Values that are not valid TOML are kept as plain strings.
    """
    if "=" not in assignment:
        raise ConfigError(f"Override must look like section.key=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    if "." not in path:
        raise ConfigError(f"Override key must name a section, got {path!r}")
    section, key = path.strip().split(".", 1)
    key = key.replace("-", "_")
    try:
        value = tomllib.loads(f"value = {raw.strip()}")["value"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return section, key, value


class ConfigHandler:
    """Handler for experiment configuration files.

    Precedence, lowest first: the TOML file, environment variables, then
    ``--set`` overrides and dedicated CLI flags.
    """

    def __init__(
        self,
        config_file: str | None = None,
        overrides: list[str] | None = None,
        environ: Mapping[str, str] | None = None,
    ) -> None:
        """Initialize the ConfigHandler.

        Args:
            config_file: Path to the TOML configuration, or None for defaults only.
            overrides: ``section.key=value`` assignments applied after the file.
            environ: Environment to read overrides from; ``os.environ`` by default.
        """
        self.config_file = config_file
        self.config_data = self._load_config()
        self._apply_environment(os.environ if environ is None else environ)
        for assignment in overrides or []:
            self._apply_override(assignment)
        self._check_keys()

    def _load_config(self) -> dict[str, Any]:
        """Load configuration from file.

        Returns:
            Configuration data.

        Raises:
            ConfigError: If the file does not exist or is not valid TOML.
        """
        if self.config_file is None:
            return {}
        try:
            with open(self.config_file, "rb") as f:
                return tomllib.load(f)
        except FileNotFoundError as e:
            logger.error(f"Configuration file not found: {self.config_file}")
            raise ConfigError(f"Configuration file not found: {self.config_file}") from e
        except tomllib.TOMLDecodeError as e:
            logger.error(f"Invalid TOML in configuration file: {e}")
            raise ConfigError(f"Invalid TOML in {self.config_file}: {e}") from e

    def _apply_environment(self, environ: Mapping[str, str]) -> None:
        experiment = self.config_data.setdefault("experiment", {})
        if environ.get(ENV_VARS.OUTPUT_ROOT):
            experiment["output_root"] = environ[ENV_VARS.OUTPUT_ROOT]
        if environ.get(ENV_VARS.JOBS):
            try:
                experiment["jobs"] = int(environ[ENV_VARS.JOBS])
            except ValueError as e:
                raise ConfigError(f"{ENV_VARS.JOBS} must be an integer, got {environ[ENV_VARS.JOBS]!r}") from e

    def _apply_override(self, assignment: str) -> None:
        section, key, value = parse_override(assignment)
        self.config_data.setdefault(section, {})[key] = value
        logger.debug(f"Override {section}.{key} = {value!r}")

    def set_value(self, section: str, key: str, value: Any) -> None:
        """Override one key, e.g. from a dedicated CLI flag."""
        self.config_data.setdefault(section, {})[key] = value
        self._check_keys()

    def _check_keys(self) -> None:
        """Reject sections and keys that no settings class declares."""
        for section, values in self.config_data.items():
            if section not in SECTIONS:
                raise ConfigError(f"Unknown configuration section: [{section}]")
            if not isinstance(values, dict):
                raise ConfigError(f"Section [{section}] must be a table")
            known = {f.name for f in fields(SECTIONS[section])}
            unknown = sorted(set(values) - known)
            if unknown:
                raise ConfigError(f"Unknown keys in [{section}]: {', '.join(unknown)}")

    def _build(self, section: str) -> Any:
        try:
            return SECTIONS[section](**copy.deepcopy(self.config_data.get(section, {})))
        except TypeError as e:
            raise ConfigError(f"Invalid [{section}] settings: {e}") from e

    def get_suite_settings(self) -> SuiteSettings:
        """Get suite settings from configuration."""
        return self._build("suite")

    def get_budget_settings(self) -> BudgetSettings:
        """Get budget settings from configuration."""
        return self._build("budgets")

    def get_beta_settings(self) -> BetaSettings:
        """Get bonus-scale settings from configuration."""
        return self._build("beta")

    def get_evaluation_settings(self) -> EvaluationSettings:
        """Get solve-criterion settings from configuration."""
        return self._build("evaluation")

    def get_algorithm_settings(self) -> AlgorithmSettings:
        """Get algorithm, seed and output settings from configuration."""
        return self._build("experiment")

    def get_experiment_config(self) -> ExperimentConfig:
        """Validate every section and assemble the experiment.

        Raises:
            ConfigError: If any section fails validation.
        """
        return ExperimentConfig(
            suite=self.get_suite_settings(),
            budgets=self.get_budget_settings(),
            beta=self.get_beta_settings(),
            evaluation=self.get_evaluation_settings(),
            experiment=self.get_algorithm_settings(),
        )
