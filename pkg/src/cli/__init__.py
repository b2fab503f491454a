"""CLI module for argument parsing and command routing."""
from src.cli.arguments import build_parser, parse_arguments, validate_arguments

__all__ = ["build_parser", "parse_arguments", "validate_arguments"]
