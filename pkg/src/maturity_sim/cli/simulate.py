"""
CLI-Verb ``simulate``: löst N und P und schreibt ``fields.csv`` und ``diagnostics.json``.

Beispiel:
    poetry run maturity-simulate --scenario preset:linear_stable --out runs/stable --horizon 5
"""

import sys
from typing import Optional, Sequence

from maturity_sim.cli.common import run_command
from maturity_sim.models.run_mode import RunMode
from maturity_sim.services.service_factory import ServiceFactory


def simulate_main(argv: Optional[Sequence[str]] = None, factory: Optional[ServiceFactory] = None) -> int:
    return run_command(RunMode.SIMULATE, argv, factory)


if __name__ == "__main__":
    sys.exit(simulate_main())
