"""
CLI-Verb ``run``: führt die Betriebsart aus ``run.mode`` des Szenarios aus.

Beispiel:
    poetry run maturity-run --scenario szenarien/nur_validieren.yaml --out runs/auto
"""

import sys
from typing import Optional, Sequence

from maturity_sim.cli.common import run_command
from maturity_sim.services.service_factory import ServiceFactory


def run_scenario_main(argv: Optional[Sequence[str]] = None, factory: Optional[ServiceFactory] = None) -> int:
    return run_command(None, argv, factory)


if __name__ == "__main__":
    sys.exit(run_scenario_main())
