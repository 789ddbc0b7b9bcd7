# schemeforge/logging_config.py

# This module configures structured logging for schemeforge using structlog (https://www.structlog.org/).

import logging
import sys
from pathlib import Path

import structlog

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s.%(funcName)s: %(message)s"


def configure_structlog(debug: bool = False, log_file: str | Path | None = None):
    """
    Configures Structlog for logging.

    The console handler writes to stderr so that stdout only ever carries result tables.

    Args:
      debug (bool): If True, logs everything at DEBUG to the console and renders events for humans.
                    If False, the console only shows CRITICAL events.
      log_file (str | Path | None): Optional file receiving INFO and above (DEBUG when debugging).
    """

    processors = [
        structlog.processors.TimeStamper(fmt="ISO"),
        structlog.processors.add_log_level,
        structlog.processors.format_exc_info,
    ]

    if debug:
        processors.append(structlog.dev.ConsoleRenderer())
    else:
        processors.append(structlog.processors.KeyValueRenderer())

    structlog.configure(
        processors=processors,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    formatter = logging.Formatter(LOG_FORMAT)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if debug else logging.CRITICAL)
    console_handler.setFormatter(formatter)
    handlers: list[logging.Handler] = [console_handler]

    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode="a", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG if debug else logging.INFO)
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    # Replaces handlers left by an earlier invocation in the same process
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
