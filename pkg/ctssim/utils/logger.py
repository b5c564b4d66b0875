"""Logging for simulation runs using the rich library.

Every record carries the simulated time of the cycle that produced it, so
scheduler and emergency events read against the trace rather than the wall
clock. Outside a run the stamp is ``--``.
"""

import logging
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.logging import RichHandler

CONSOLE_FORMAT = "[%(sim_time)s] %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(sim_time)s] %(message)s"

_sim_time: float | None = None


def set_sim_time(time: float | None) -> None:
    """Set the simulated time stamped on records; None outside a run."""
    global _sim_time
    _sim_time = time


def get_sim_time() -> float | None:
    return _sim_time


class SimTimeFilter(logging.Filter):
    """Adds ``record.sim_time`` ("t=12.340s" or "--")."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.sim_time = "--" if _sim_time is None else f"t={_sim_time:.3f}s"
        return True


class SimLogger:
    """Module logger for planner, scheduler and harness events."""

    def __init__(
        self, name: str, log_file: Path | None = None, level: int = logging.INFO
    ):
        """
        Initialize SimLogger.

        Args:
            name: Logger name (``ctssim.<area>``)
            log_file: Optional run log; always written at DEBUG
            level: Console logging level (default: INFO)
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(level)
        self.logger.handlers = []
        self.logger.filters = []
        self.logger.propagate = False
        self.logger.addFilter(SimTimeFilter())

        # stderr, so tables and piped output on stdout stay clean
        self.console = Console(stderr=True)

        rich_handler = RichHandler(
            console=self.console,
            show_time=False,
            show_path=False,
            rich_tracebacks=True,
            tracebacks_show_locals=False,
        )
        rich_handler.setLevel(level)
        rich_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        self.logger.addHandler(rich_handler)

        if log_file:
            log_file.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
            self.logger.addHandler(file_handler)
            # File gets everything; the console handler keeps its own level
            self.logger.setLevel(logging.DEBUG)

    def debug(self, msg: str, *args: Any, **kwargs: Any) -> None:
        self.logger.debug(msg, *args, **kwargs)

    def info(self, msg: str, *args: Any, **kwargs: Any) -> None:
        self.logger.info(msg, *args, **kwargs)

    def warning(self, msg: str, *args: Any, **kwargs: Any) -> None:
        self.logger.warning(msg, *args, **kwargs)

    def error(self, msg: str, *args: Any, **kwargs: Any) -> None:
        self.logger.error(msg, *args, **kwargs)

    def is_debug(self) -> bool:
        """Whether a debug record would reach any handler (guards per-cycle messages)."""
        return self.logger.isEnabledFor(logging.DEBUG) and any(
            h.level <= logging.DEBUG for h in self.logger.handlers
        )

    @property
    def console_level(self) -> int:
        for handler in self.logger.handlers:
            if isinstance(handler, RichHandler):
                return handler.level
        return self.logger.level

    def set_level(self, level: int) -> None:
        """Set the console level; a run log file stays at DEBUG."""
        has_file = any(isinstance(h, logging.FileHandler) for h in self.logger.handlers)
        self.logger.setLevel(logging.DEBUG if has_file else level)
        for handler in self.logger.handlers:
            if isinstance(handler, RichHandler):
                handler.setLevel(level)


_global_logger: SimLogger | None = None
_named_loggers: dict[str, SimLogger] = {}


def setup_logging(
    name: str = "ctssim",
    log_file: Path | None = None,
    level: int = logging.INFO,
) -> SimLogger:
    """
    Configure the root ``ctssim`` logger.

    Named loggers created at import time are moved to the new level so they
    follow the CLI verbosity.

    Args:
        name: Logger name
        log_file: Optional run log file
        level: Console logging level

    Returns:
        SimLogger instance
    """
    global _global_logger
    _global_logger = SimLogger(name, log_file, level)
    _named_loggers[name] = _global_logger
    for logger_name, existing in _named_loggers.items():
        if logger_name != name:
            existing.set_level(level)
    return _global_logger


def get_logger(name: str | None = None) -> SimLogger:
    """
    Get a cached module logger.

    Args:
        name: Logger name; None or ``ctssim`` returns the root logger

    Returns:
        SimLogger instance
    """
    global _global_logger
    if name and name != "ctssim":
        existing = _named_loggers.get(name)
        if existing is not None:
            return existing

        level = logging.INFO
        if _global_logger is not None:
            level = _global_logger.console_level

        logger = SimLogger(name, level=level)
        _named_loggers[name] = logger
        return logger
    if _global_logger is None:
        _global_logger = setup_logging()
    return _global_logger
