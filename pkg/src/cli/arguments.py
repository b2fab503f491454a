"""Command-line argument parsing and validation."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from src.constants import EXIT


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        help="Path to the experiment TOML file (defaults apply when omitted)"
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one configuration key, e.g. --set budgets.n-rf=500 (repeatable)"
    )
    parser.add_argument(
        "--jobs",
        type=int,
        help="Worker processes (overrides experiment.jobs and REPTRANSFER_JOBS)"
    )
    parser.add_argument(
        "--output-root",
        help="Output root directory (overrides experiment.output_root and REPTRANSFER_OUTPUT_ROOT)"
    )


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(
        description="Representation transfer experiments on Block MDPs."
    )
    parser.add_argument(
        "--verbose",
        action="store_true",
        help="Log DEBUG messages"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment and write its results")
    _add_config_arguments(run)

    validate = commands.add_parser("validate-config", help="Load and validate a configuration, then exit")
    _add_config_arguments(validate)

    summarize = commands.add_parser("summarize", help="Summarize finished experiments into one table")
    summarize.add_argument(
        "experiments",
        nargs="+",
        help="Experiment directories or manifest.json files"
    )
    summarize.add_argument(
        "--output",
        required=True,
        help="Directory for summary.csv and summary.txt"
    )

    viz = commands.add_parser("viz", help="Write decoder visualizations for a finished run")
    viz.add_argument(
        "run_dir",
        help="Per-seed run directory holding report.json and suite.json"
    )
    viz.add_argument(
        "--output",
        help="Directory for the grids (default: <run_dir>/viz)"
    )
    viz.add_argument(
        "--seed",
        type=int,
        default=0,
        help="Seed of the emission draws"
    )

    verify = commands.add_parser("verify-lower-bound", help="Check the online-access lower bound construction")
    verify.add_argument(
        "--samples",
        type=int,
        default=2000,
        help="Tuples per dataset for the online and cross-sampled fits"
    )
    verify.add_argument(
        "--seed",
        type=int,
        default=0,
        help="Seed of the sampling stream"
    )
    verify.add_argument(
        "--output",
        help="Write the result as JSON to this file"
    )
    return parser


def parse_arguments(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments.

    Args:
        argv: Arguments to parse; ``sys.argv[1:]`` when None.

    Returns:
        Parsed arguments namespace.
    """
    return build_parser().parse_args(argv)


def validate_arguments(args: argparse.Namespace, logger: logging.Logger) -> None:
    """Validate command line arguments.

    Args:
        args: Parsed arguments namespace.
        logger: Logger instance for error messages.

    Exits with the configuration-error code if validation fails.
    """
    config = getattr(args, "config", None)
    if config and not os.path.isfile(config):
        logger.error(f"Configuration file '{config}' does not exist")
        sys.exit(EXIT.CONFIG_ERROR)

    jobs = getattr(args, "jobs", None)
    if jobs is not None and jobs < 1:
        logger.error(f"--jobs must be positive, got {jobs}")
        sys.exit(EXIT.CONFIG_ERROR)

    if args.command == "viz" and not os.path.isdir(args.run_dir):
        logger.error(f"Run directory '{args.run_dir}' does not exist")
        sys.exit(EXIT.CONFIG_ERROR)

    if args.command == "verify-lower-bound" and args.samples < 1:
        logger.error(f"--samples must be positive, got {args.samples}")
        sys.exit(EXIT.CONFIG_ERROR)
