"""
Konfiguriert das Logging für maturity_sim mit loguru.

Fügt einen farbigen Konsolen-Logger (INFO, bzw. DEBUG im Debug-Modus) und einen Datei-Logger
(DEBUG, Rotation, Retention) hinzu. Logdateien werden standardmäßig im Verzeichnis logs/ abgelegt.

Beispiel:
    >>> from maturity_sim.config import logging_config
    >>> from loguru import logger
    >>> logger.info("Test")
    2025-07-21 12:00:00 | INFO     | ... - Test
"""

import sys

from loguru import logger

from maturity_sim.config.settings import settings

FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} - {message}"


def configure_logging(log_file: str | None = None, debug: bool | None = None) -> None:
    """
    Setzt die loguru-Sinks neu auf.

    Args:
        log_file (str | None): Pfad der Logdatei, Default aus den Settings.
        debug (bool | None): Konsole auf DEBUG schalten, Default aus den Settings.
    """
    log_file = log_file or settings.log_file
    debug = settings.debug if debug is None else debug
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if debug else "INFO")
    logger.add(
        sink=log_file,
        level="DEBUG",
        rotation="1 day",
        retention="7 days",
        encoding="utf-8",
        format=FILE_FORMAT,
    )


configure_logging()
