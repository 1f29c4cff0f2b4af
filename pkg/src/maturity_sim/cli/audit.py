"""
CLI-Verb ``audit``: Simulation plus Satz-Audits (H^a-Invarianz, Invarianzball, Wachstumsschranke,
P-Bilanz, verfeinertes Residuum, Stetigkeitsprobe). Ergebnisse in ``diagnostics.json`` und ``audit.json``.

Beispiel:
    poetry run maturity-audit --scenario preset:linear_stable --threads 2
"""

import sys
from typing import Optional, Sequence

from maturity_sim.cli.common import run_command
from maturity_sim.models.run_mode import RunMode
from maturity_sim.services.service_factory import ServiceFactory


def audit_main(argv: Optional[Sequence[str]] = None, factory: Optional[ServiceFactory] = None) -> int:
    return run_command(RunMode.AUDIT, argv, factory)


if __name__ == "__main__":
    sys.exit(audit_main())
