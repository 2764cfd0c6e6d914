from __future__ import annotations

import logging

TRACE = 5  # DEBUG - 5


def patch_log_levels_in_python_logging_module() -> None:
    """Patch the Python logging module to add the TRACE level used for per-iteration solver output."""
    assert logging.NOTSET < TRACE < logging.DEBUG, "TRACE level must be between NOTSET and DEBUG"
    logging.addLevelName(TRACE, "TRACE")


def verbosity_to_level(verbosity: int) -> int:
    """Map a `-v` count to a logging level."""
    return {
        0: logging.WARNING,
        1: logging.INFO,
        2: logging.DEBUG,
    }.get(verbosity, TRACE)
