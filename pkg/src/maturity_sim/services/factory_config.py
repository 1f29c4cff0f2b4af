"""
Zentrale Factory-Konfiguration für maturity_sim.
Initialisiert die ServiceFactory mit allen benötigten Klassen.
"""

from maturity_sim.services.report_service import ReportService
from maturity_sim.services.scenario_service import ScenarioService
from maturity_sim.services.service_factory import ServiceFactory
from maturity_sim.services.simulation_service import SimulationService
from maturity_sim.services.sweep_service import SweepService


def create_service_factory() -> ServiceFactory:
    """Erstellt und konfiguriert die zentrale ServiceFactory für das Projekt."""
    return ServiceFactory(
        scenario_service_class=ScenarioService,
        report_service_class=ReportService,
        simulation_service_class=SimulationService,
        sweep_service_class=SweepService,
    )
