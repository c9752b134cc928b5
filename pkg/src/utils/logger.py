"""
Logging configuration for the GSDNet toolkit
"""
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

from .config import Config


def setup_logger(name: str = "gsdnet",
                 level: Union[int, str, None] = None,
                 log_dir: Optional[Path] = None) -> logging.Logger:
    """
    Setup application logger with console and optional file handlers

    Args:
        name: Logger name
        level: Logging level (default: Config.LOG_LEVEL)
        log_dir: Directory for the detailed log file; no file handler if None

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(level or Config.LOG_LEVEL)

    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    simple_formatter = logging.Formatter('%(levelname)s - %(message)s')

    # Avoid duplicate console handlers
    if not any(getattr(h, "_gsdnet_console", False) for h in logger.handlers):
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(simple_formatter)
        console_handler._gsdnet_console = True
        logger.addHandler(console_handler)

    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"gsdnet_{datetime.now().strftime('%Y%m%d')}.log"

        already = any(
            isinstance(h, logging.FileHandler) and Path(h.baseFilename) == log_file.resolve()
            for h in logger.handlers
        )
        if not already:
            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(detailed_formatter)
            logger.addHandler(file_handler)

    return logger
