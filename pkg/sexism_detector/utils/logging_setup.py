"""
Logging configuration shared by the command-line entry points.
"""
import logging
from pathlib import Path
from typing import List, Optional, Union

from rich.console import Console
from rich.logging import RichHandler

from sexism_detector import settings

LOG_FILE_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"


def configure_logging(level: Optional[str] = None, log_file: Optional[Union[str, Path]] = None) -> None:
    """
    Install a rich console handler on stderr and an optional file handler.

    Args:
        level: Log level name; defaults to settings.LOG_LEVEL
        log_file: Optional path of a plain-text log file
    """
    level_name = (level or settings.LOG_LEVEL).upper()
    numeric_level = logging.getLevelName(level_name)
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO

    handlers = [
        RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
    ]
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(path, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FILE_FORMAT))
        handlers.append(file_handler)

    logging.basicConfig(level=numeric_level, format="%(message)s", handlers=handlers, force=True)


class WarningCollector(logging.Handler):
    """Keeps the messages of WARNING and higher records for the run summary."""

    def __init__(self, level: int = logging.WARNING):
        super().__init__(level)
        self.warnings: List[str] = []
        self.errors: List[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        message = f"{record.name}: {record.getMessage()}"
        if record.levelno >= logging.ERROR:
            self.errors.append(message)
        else:
            self.warnings.append(message)

    def __enter__(self) -> "WarningCollector":
        logging.getLogger().addHandler(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        logging.getLogger().removeHandler(self)
