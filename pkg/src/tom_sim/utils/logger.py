"""
Logging Utility Module

Provides centralized logging for tom-sim components, supporting console and
file output, log levels, and a shared format.
"""

import logging
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


class TomSimLogger:
    """Centralized logger for tom-sim."""

    def __init__(self, name: str, log_file: Optional[str] = None):
        self.logger = logging.getLogger(name)
        if self.logger.level == logging.NOTSET:
            self.logger.setLevel(logging.INFO)
        formatter = logging.Formatter(LOG_FORMAT)
        # one console handler per name, however many components share it
        if not any(getattr(h, '_tom_sim', False) for h in self.logger.handlers):
            ch = logging.StreamHandler()
            ch.setFormatter(formatter)
            ch._tom_sim = True  # type: ignore[attr-defined]
            self.logger.addHandler(ch)
        if log_file:
            fh = logging.FileHandler(log_file)
            fh.setFormatter(formatter)
            self.logger.addHandler(fh)

    def set_level(self, level: int) -> None:
        self.logger.setLevel(level)

    def info(self, msg: str) -> None:
        self.logger.info(msg)

    def warning(self, msg: str) -> None:
        self.logger.warning(msg)

    def error(self, msg: str) -> None:
        self.logger.error(msg)

    def debug(self, msg: str) -> None:
        self.logger.debug(msg)


def configure_root(level: int = logging.INFO, log_file: Optional[str] = None) -> None:
    """Apply the shared format to the ``tom_sim`` logger tree (used by the CLI)."""
    root = logging.getLogger('tom_sim')
    root.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT)
    if not root.handlers:
        ch = logging.StreamHandler()
        ch.setFormatter(formatter)
        root.addHandler(ch)
    if log_file:
        fh = logging.FileHandler(log_file)
        fh.setFormatter(formatter)
        root.addHandler(fh)
