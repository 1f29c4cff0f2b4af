"""
Protokolle für die Services der Laufsteuerung.

Die CLI und die ServiceFactory kennen nur diese PEP 544-Verträge; Implementierungen können für Tests
durch Mocks ersetzt werden.
"""

from pathlib import Path
from typing import Any, Mapping, Optional, Protocol, Sequence, runtime_checkable

from pydantic import BaseModel

from maturity_sim.errors import MaturitySimError
from maturity_sim.models.coefficients import InitialData, ModelCoefficients
from maturity_sim.models.reports import RunDiagnostics, SweepRow, ValidationReport
from maturity_sim.models.scenario import Scenario, SweepAxis
from maturity_sim.services.commitment_service import CommitmentMaps
from maturity_sim.services.solver_service import SolutionField


@runtime_checkable
class ScenarioServiceProtocol(Protocol):
    """Laden, Schreiben und Auflösen von Szenario-Dokumenten."""

    def load_scenario(self, path: str | Path) -> Scenario: ...

    def write_scenario(self, scenario: Scenario, path: Optional[str | Path] = None) -> str: ...

    def load_preset(self, name: str) -> Scenario: ...

    def resolve(self, reference: str) -> Scenario: ...

    def apply_overrides(
        self, scenario: Scenario, horizon: Optional[float] = None, seed: Optional[int] = None
    ) -> Scenario: ...

    def with_parameter(self, scenario: Scenario, name: str, value: float) -> Scenario: ...

    def build_coefficients(self, scenario: Scenario) -> ModelCoefficients: ...

    def build_initial_data(self, scenario: Scenario, coeffs: ModelCoefficients) -> InitialData: ...


@runtime_checkable
class ReportServiceProtocol(Protocol):
    """Atomares Schreiben der Artefakte eines Laufs."""

    def write_fields(self, out_dir: Path, N: SolutionField, P: SolutionField) -> Path: ...

    def write_table(self, path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path: ...

    def write_maps(self, out_dir: Path, maps: CommitmentMaps) -> Path: ...

    def write_json(self, path: Path, payload: BaseModel | Mapping[str, Any]) -> Path: ...

    def write_error(self, out_dir: Path, error: MaturitySimError) -> Path: ...


@runtime_checkable
class SimulationServiceProtocol(Protocol):
    """Validierung, Simulation, Audit und Tabellen-Export für ein Szenario."""

    def validate(self, scenario: Scenario, out_dir: Path) -> ValidationReport: ...

    def dump_maps(self, scenario: Scenario, out_dir: Path) -> Path: ...

    def run_simulation(
        self, scenario: Scenario, out_dir: Path, audit: bool = False, threads: Optional[int] = None
    ) -> RunDiagnostics: ...


@runtime_checkable
class SweepServiceProtocol(Protocol):
    """Stabilitätsurteile über einem Parametergitter."""

    def sweep_stability(
        self,
        scenario: Scenario,
        out_dir: Path,
        axes: Optional[Sequence[SweepAxis]] = None,
        threads: Optional[int] = None,
    ) -> list[SweepRow]: ...
