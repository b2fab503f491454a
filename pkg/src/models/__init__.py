"""
Settings models for representation transfer experiments.
"""
from src.models.settings import (
    AlgorithmSettings,
    BetaSettings,
    BudgetSettings,
    EvaluationSettings,
    ExperimentConfig,
    SuiteSettings,
)

__all__ = [
    "AlgorithmSettings",
    "BetaSettings",
    "BudgetSettings",
    "EvaluationSettings",
    "ExperimentConfig",
    "SuiteSettings",
]
