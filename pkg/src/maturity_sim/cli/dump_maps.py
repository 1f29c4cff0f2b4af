"""
CLI-Verb ``dump-maps``: schreibt Θ, Δ, g⁻¹, (g⁻¹)', π und ζ auf dem Reifegradgitter nach ``maps.csv``.

Beispiel:
    poetry run maturity-dump-maps --scenario preset:power_velocity
"""

import sys
from typing import Optional, Sequence

from maturity_sim.cli.common import run_command
from maturity_sim.models.run_mode import RunMode
from maturity_sim.services.service_factory import ServiceFactory


def dump_maps_main(argv: Optional[Sequence[str]] = None, factory: Optional[ServiceFactory] = None) -> int:
    return run_command(RunMode.MAPS_DUMP, argv, factory)


if __name__ == "__main__":
    sys.exit(dump_maps_main())
