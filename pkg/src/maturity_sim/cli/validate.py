"""
CLI-Verb ``validate``: prüft die Strukturhypothesen der Koeffizienten eines Szenarios.

Beispiel:
    poetry run maturity-validate --scenario preset:linear_stable --out runs/validate
"""

import sys
from typing import Optional, Sequence

from maturity_sim.cli.common import run_command
from maturity_sim.models.run_mode import RunMode
from maturity_sim.services.service_factory import ServiceFactory


def validate_main(argv: Optional[Sequence[str]] = None, factory: Optional[ServiceFactory] = None) -> int:
    """Schreibt ``validation.json``; Exit-Status 1 bei verletzten Hypothesen."""
    return run_command(RunMode.VALIDATE, argv, factory)


if __name__ == "__main__":
    sys.exit(validate_main())
