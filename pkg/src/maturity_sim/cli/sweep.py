"""
CLI-Verb ``sweep``: Stabilitätsurteil, Abklingrate und Übereinstimmung über ``run.sweep_axes``.

Beispiel:
    poetry run maturity-sweep --scenario preset:linear_stable --threads 4 --out runs/sweep
"""

import sys
from typing import Optional, Sequence

from maturity_sim.cli.common import run_command
from maturity_sim.models.run_mode import RunMode
from maturity_sim.services.service_factory import ServiceFactory


def sweep_main(argv: Optional[Sequence[str]] = None, factory: Optional[ServiceFactory] = None) -> int:
    return run_command(RunMode.SWEEP, argv, factory)


if __name__ == "__main__":
    sys.exit(sweep_main())
