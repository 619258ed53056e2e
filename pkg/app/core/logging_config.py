"""Centralized logging configuration for the simulator."""
from __future__ import annotations

import logging
import logging.handlers
import os
import time

from app.core.config import settings


def setup_logging(level: str | None = None) -> None:
    """Configure the root logger with the project format and handlers."""
    level_name = (level or settings.LOG_LEVEL).upper()
    log_level = getattr(logging, level_name, logging.INFO)

    formatter = logging.Formatter(
        "%(asctime)sZ | %(levelname)s | %(name)s | %(message)s",
        datefmt="%Y-%m-%dT%H:%M:%S",
    )
    logging.Formatter.converter = time.gmtime

    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(formatter)
    handlers: list[logging.Handler] = [stream_handler]

    if settings.LOG_FILE:
        directory = os.path.dirname(settings.LOG_FILE)
        if directory:
            os.makedirs(directory, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            settings.LOG_FILE,
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers = handlers

    # numpy and friends stay quiet unless something is wrong.
    for name in ("asyncio", "numpy"):
        logging.getLogger(name).setLevel(max(log_level, logging.WARNING))


__all__ = ["setup_logging"]
