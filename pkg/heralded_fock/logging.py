"""Logging module."""

import os
import socket
import sys

from loguru import logger as _logger

LOG_FILE_ENV = "HERALDED_FOCK_LOG_FILE"
LOG_LEVEL_ENV = "HERALDED_FOCK_LOG_LEVEL"
RUN_ID_ENV = "HERALDED_FOCK_RUN_ID"

DEFAULT_LEVEL = "WARNING"


def getsink():
    """Return log sink location, a file path when configured and stderr otherwise."""
    return os.getenv(LOG_FILE_ENV) or sys.stderr


def getlogger():
    """Configure and return a logger."""
    sink = getsink()
    handler = {
        "format": "[{time}] {level} {message}",
        "sink": sink,
        "level": os.getenv(LOG_LEVEL_ENV, DEFAULT_LEVEL),
    }
    if isinstance(sink, str):
        handler.update(
            {
                "rotation": "1 day",
                "retention": 7,
                "enqueue": True,
                "serialize": True,
            }
        )

    _logger.configure(
        handlers=[handler],
        extra={
            "host": socket.gethostname(),
            "run_id": os.getenv(RUN_ID_ENV),
        },
    )
    return _logger


logger = getlogger()
