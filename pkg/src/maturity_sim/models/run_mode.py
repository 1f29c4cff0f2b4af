"""
Betriebsarten eines Laufs.

Jede Betriebsart entspricht einem CLI-Verb; ``RUN_MODES`` liefert die Hilfetexte.
"""

from enum import Enum
from typing import NamedTuple


class RunMode(str, Enum):
    """Betriebsarten eines Szenarios."""

    VALIDATE = "validate"  # Nur Strukturhypothesen prüfen
    SIMULATE = "simulate"  # N und P lösen, Felder und Diagnosen schreiben
    AUDIT = "audit"  # Simulation plus Satz-Audits (H^a, Invarianz, Stetigkeit)
    SWEEP = "sweep"  # Stabilitätszertifikat über ein Parametergitter
    MAPS_DUMP = "maps-dump"  # Θ, Δ, g⁻¹, π, ζ tabellieren


class RunModeInfo(NamedTuple):
    """Metadaten einer Betriebsart für die CLI-Hilfe."""

    mode: RunMode
    verb: str
    description: str


RUN_MODES = [
    RunModeInfo(RunMode.VALIDATE, "validate", "Prüft die Strukturhypothesen der Koeffizienten"),
    RunModeInfo(RunMode.SIMULATE, "simulate", "Löst die integrierte Formulierung und schreibt N, P als CSV"),
    RunModeInfo(RunMode.AUDIT, "audit", "Simulation mit Positivitäts-, Invarianz- und Stetigkeitsprüfungen"),
    RunModeInfo(RunMode.SWEEP, "sweep", "Stabilitätsurteil und Abklingrate über einem Parametergitter"),
    RunModeInfo(RunMode.MAPS_DUMP, "dump-maps", "Schreibt die Tabellen der Festlegungsabbildungen"),
]


def info_for(mode: RunMode) -> RunModeInfo:
    return next(info for info in RUN_MODES if info.mode == mode)
