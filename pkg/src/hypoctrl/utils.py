"""Hypoctrl Utilities Module.

Common utility functions shared by the estimation pipeline and the CLI.
"""

import logging
from pathlib import Path
from typing import Union

#: Name of the package logger; library modules log to children of it.
PACKAGE_LOGGER = "hypoctrl"


def format_duration(seconds: float) -> str:
    """Format a wall time the way the benchmark tables print it.

    Args:
        seconds: Elapsed time in seconds.

    Returns:
        str: ``"9s"``, ``"3min15s"`` or ``"1h40min"`` style string.

    Example:
        >>> format_duration(195.2)
        '3min15s'
    """
    if seconds < 60:
        return f"{seconds:.0f}s"
    if seconds < 3600:
        minutes = int(seconds // 60)
        return f"{minutes}min{int(seconds % 60):02d}s"
    hours = int(seconds // 3600)
    minutes = int((seconds % 3600) // 60)
    return f"{hours}h{minutes:02d}min"


# Logging configuration for console and optional file output
def setup_logger(
    log_file: Union[str, Path, None] = None, level: Union[str, int] = "INFO"
) -> logging.Logger:
    """Configure the package logger for console display and file logging.

    Library modules call ``logging.getLogger(__name__)`` and never attach
    handlers; entry points call this function once.

    Args:
        log_file: Optional path of a log file. Console only when None.
        level: Logging level name or number (default: 'INFO').

    Returns:
        logging.Logger: Configured ``hypoctrl`` logger instance
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(level)

    # Remove existing handlers to avoid duplication
    if logger.handlers:
        logger.handlers.clear()

    formatter = logging.Formatter(
        "%(asctime)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
    )

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file is not None:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger
