"""
Testet, ob die Logging-Konfiguration von maturity_sim Logdateien erzeugt und beschreibt.
"""

from loguru import logger

from maturity_sim.config.logging_config import configure_logging


def test_configure_logging_writes_file(tmp_path):
    logfile = tmp_path / "logs" / "maturity_sim.log"
    configure_logging(log_file=str(logfile), debug=True)
    try:
        logger.debug("Debug-Eintrag für den Datei-Logger")
        logger.warning("Warnung für den Datei-Logger")
        assert logfile.exists(), f"Logdatei {logfile} wurde nicht angelegt."
        content = logfile.read_text(encoding="utf-8")
        assert "Debug-Eintrag" in content
        assert "| WARNING |" in content
    finally:
        configure_logging()
