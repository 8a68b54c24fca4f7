"""
Loguru setup for cfrac-prover.

Every record carries a ``problem`` and a ``stage`` extra; the pipeline binds
them, engine modules log through the plain ``logger`` and show ``-``.
"""

import sys
import time
from typing import Optional

from loguru import logger

from .settings import get_settings

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | "
    "<level>{level: <7}</level> | "
    "<magenta>{extra[problem]}</magenta>:<cyan>{extra[stage]}</cyan> | "
    "<level>{message}</level>"
)
TEXT_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <7} | {extra[problem]}:{extra[stage]} | {name}:{line} | {message}"


def setup_logging(level: Optional[str] = None, to_file: Optional[bool] = None) -> None:
    """
    Replace loguru's default sink with the console sink and, unless disabled,
    a rotating run log plus an errors-only log next to it.

    Args:
        level: Overrides the configured level (the CLI passes DEBUG for --debug)
        to_file: Overrides ``settings.log_to_file``
    """
    settings = get_settings()
    level = level or settings.log_level
    to_file = settings.log_to_file if to_file is None else to_file

    logger.remove()
    logger.configure(extra={"problem": "-", "stage": "-"})
    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level, colorize=True, diagnose=settings.debug)

    if to_file:
        path = settings.get_log_file_path()
        # json lines come from loguru's serializer, the format string is ignored then
        serialize = settings.log_format == "json"
        common = dict(
            format=TEXT_FORMAT,
            serialize=serialize,
            compression="gz",
            diagnose=settings.debug,
            enqueue=True,
        )
        logger.add(path, level=level, rotation=settings.log_rotation, retention=settings.log_retention, **common)
        logger.add(
            path.replace(".log", "_errors.log"),
            level="ERROR",
            rotation="1 week",
            retention="90 days",
            **common,
        )

    logger.debug(f"{settings.app_name} v{settings.app_version}, log level {level}")


def problem_logger(problem: str, stage: str = "-"):
    """Logger bound to one problem (and optionally one stage)."""
    return logger.bind(problem=problem, stage=stage)


class LoggingMixin:
    """Gives a class a ``logger`` bound to its own name."""

    @property
    def logger(self):
        return logger.bind(component=self.__class__.__name__)


class LogExecutionTime:
    """
    Times a block and logs it at DEBUG, or at WARNING when the block raises.
    ``duration`` keeps the elapsed seconds after exit; exceptions propagate.
    """

    def __init__(self, name: str, logger_instance=None):
        self.name = name
        self.logger = logger_instance or logger
        self.duration = 0.0
        self._started = 0.0

    def __enter__(self) -> "LogExecutionTime":
        self._started = time.perf_counter()
        self.logger.debug(f"{self.name} started")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        self.duration = time.perf_counter() - self._started
        if exc_type is None:
            self.logger.debug(f"{self.name} done in {self.duration:.3f}s")
        else:
            self.logger.warning(f"{self.name} failed after {self.duration:.3f}s: {exc_val}")
        return False
