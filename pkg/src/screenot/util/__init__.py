import logging
from pathlib import Path

import rich.console

from ._logging import verbosity_to_level

logger = logging.getLogger(__name__)

_installed_handlers: list[logging.Handler] = []


def configure_logging(
    verbosity: int = 0,
    console: rich.console.Console | None = None,
    filename: Path | str | None = None,
) -> None:
    """Install a rich console handler on the root logger, and optionally a plain file handler.

    Handlers installed by an earlier call are replaced, so the CLI can be invoked repeatedly in one process.

    Args:
        verbosity: Number of `-v` flags; 0 is WARNING, 1 INFO, 2 DEBUG, 3 and more TRACE.
        console: Console to render to; defaults to a console on stderr.
        filename: If given, additionally log everything at the selected level to this file.
    """
    from rich.logging import RichHandler

    level = verbosity_to_level(verbosity)
    root_logger = logging.getLogger()
    for handler in _installed_handlers:
        root_logger.removeHandler(handler)
        handler.close()
    _installed_handlers.clear()

    root_logger.setLevel(level)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)

    console = console or rich.console.Console(stderr=True)
    rich_handler = RichHandler(console=console, rich_tracebacks=True, show_path=False)
    rich_handler.setFormatter(logging.Formatter("%(name)-28s %(message)s", datefmt="[%X]"))
    _installed_handlers.append(rich_handler)

    if filename:
        file_handler = logging.FileHandler(filename)
        file_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s.%(msecs)03d %(name)-30s %(levelname)-8s: %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
        _installed_handlers.append(file_handler)

    for handler in _installed_handlers:
        root_logger.addHandler(handler)
    logger.debug("Logging configured at level %s", logging.getLevelName(level))
