"""Command handlers, one per CLI subcommand."""
from src.commands.experiment import run_experiment_command, run_validate_config
from src.commands.summarize import run_summarize
from src.commands.verify import run_verify_lower_bound
from src.commands.viz import run_viz

__all__ = [
    "run_experiment_command",
    "run_summarize",
    "run_validate_config",
    "run_verify_lower_bound",
    "run_viz",
]
