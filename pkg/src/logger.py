"""
Logger module for the representation transfer toolkit.
"""
from __future__ import annotations

import logging
import sys

from src.constants import LOGGER_NAME


def setup_logger(verbose: bool = False) -> logging.Logger:
    """Set up and configure the logger.

    Calling this more than once (for example inside worker processes) does not
    attach duplicate handlers.

    Args:
        verbose: Log DEBUG messages when True, INFO otherwise.

    Returns:
        Configured logger instance.
    """
    level = logging.DEBUG if verbose else logging.INFO

    # Create logger
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)

    if not logger.handlers:
        # Create console handler
        console_handler = logging.StreamHandler(sys.stdout)

        # Create formatter
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    for handler in logger.handlers:
        handler.setLevel(level)

    return logger
