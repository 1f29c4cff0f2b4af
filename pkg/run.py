# run.py
"""
Zentrale Runner-Datei für das maturity_sim-Projekt.

Dieses Modul stellt den Einstiegspunkt für alle CLI-Verben bereit. Es wählt das Subkommando und
leitet die übrigen Argumente an das jeweilige CLI-Modul weiter.

Beispiel:
    python run.py validate --scenario preset:linear_stable
    python run.py simulate --scenario preset:linear_stable --out runs/stable
    python run.py audit --scenario preset:linear_stable --threads 2
    python run.py sweep --scenario preset:linear_stable --threads 4
    python run.py dump-maps --scenario preset:power_velocity
    python run.py run --scenario szenario.yaml

Architektur-Entscheidung:
    - Die zentrale Steuerung erfolgt über argparse und Subparser.
    - Logging wird über loguru bereitgestellt und dokumentiert alle Schritte.
    - Die CLI-Module sind lose gekoppelt und können unabhängig getestet werden.
"""

import argparse
import sys
from typing import Optional, Sequence

from loguru import logger

from maturity_sim.cli.audit import audit_main
from maturity_sim.cli.dump_maps import dump_maps_main
from maturity_sim.cli.run_scenario import run_scenario_main
from maturity_sim.cli.simulate import simulate_main
from maturity_sim.cli.sweep import sweep_main
from maturity_sim.cli.validate import validate_main
from maturity_sim.config import logging_config  # noqa: F401
from maturity_sim.models.run_mode import RUN_MODES

COMMANDS = {
    "validate": validate_main,
    "simulate": simulate_main,
    "audit": audit_main,
    "sweep": sweep_main,
    "dump-maps": dump_maps_main,
    "run": run_scenario_main,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Einstiegspunkt für das maturity_sim-Projekt.

    Ablauf:
        1. Initialisiert argparse mit Subparsern für alle Verben.
        2. Übergibt alle weiteren Argumente an das jeweilige CLI-Modul.
        3. Gibt dessen Exit-Status zurück.
    """
    logger.info("Starte maturity_sim Runner.")
    parser = argparse.ArgumentParser(description="Zentrale Runner-Datei für maturity_sim. Wähle ein Subkommando.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for info in RUN_MODES:
        subparsers.add_parser(info.verb, help=info.description, add_help=False)
    subparsers.add_parser("run", help="Betriebsart aus run.mode des Szenarios", add_help=False)

    args, unknown = parser.parse_known_args(argv)
    logger.info(f"Starte Subkommando: {args.command}")
    status = COMMANDS[args.command](unknown)
    logger.info(f"Subkommando {args.command} beendet mit Status {status}.")
    return status


if __name__ == "__main__":
    sys.exit(main())
