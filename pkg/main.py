#!/usr/bin/env python3
"""
Representation transfer experiments - learn shared Block MDP features in source tasks, deploy them in a target.
"""
from __future__ import annotations

import sys

from src.cli.arguments import parse_arguments, validate_arguments
from src.commands.experiment import run_experiment_command, run_validate_config
from src.commands.summarize import run_summarize
from src.commands.verify import run_verify_lower_bound
from src.commands.viz import run_viz
from src.constants import EXIT
from src.errors import ConfigError
from src.logger import setup_logger

COMMANDS = {
    "run": run_experiment_command,
    "validate-config": run_validate_config,
    "summarize": run_summarize,
    "viz": run_viz,
    "verify-lower-bound": run_verify_lower_bound,
}


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the application.

    Returns:
        Process exit code.
    """
    # Parse and validate command line arguments
    args = parse_arguments(argv)

    # Setup logging
    logger = setup_logger(args.verbose)
    validate_arguments(args, logger)

    try:
        return COMMANDS[args.command](args, logger)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT.CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
