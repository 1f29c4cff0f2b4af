"""
ServiceFactory: zentrale Factory für die Services der Laufsteuerung.

Die Klassen werden per Dependency Injection übergeben; Services sind Singletons pro Factory.
Tests können einzelne Klassen durch Mocks ersetzen.

Example:
    factory = create_service_factory()
    simulation = factory.get_simulation_service()
"""

from typing import Any

from loguru import logger

from maturity_sim.config.settings import settings

from .protocols import (
    ReportServiceProtocol,
    ScenarioServiceProtocol,
    SimulationServiceProtocol,
    SweepServiceProtocol,
)


class ServiceFactory:
    """
    Factory für die Erstellung und Verwaltung aller Service-Instanzen.

    Args:
        **kwargs: Mapping von Klassennamen (``<name>_class``) zu Implementierungen.

    Attributes:
        _classes (dict): Registry aller Service-Klassen.
        _instances (dict): Cache für Singleton-Instanzen.
    """

    def __init__(self, **kwargs: Any) -> None:
        logger.debug("Initialisiere ServiceFactory mit Klassen-Registry.")
        self._classes = kwargs
        self._instances: dict[str, Any] = {}

    def _class_for(self, key: str) -> Any:
        service_class = self._classes.get(key)
        if service_class is None:
            raise ValueError(f"Keine Klasse für '{key}' konfiguriert.")
        return service_class

    def get_scenario_service(self) -> ScenarioServiceProtocol:
        """Gibt die Singleton-Instanz des ScenarioService zurück."""
        if "scenario_service" not in self._instances:
            logger.debug("Erzeuge Singleton-Instanz: ScenarioService")
            self._instances["scenario_service"] = self._class_for("scenario_service_class")(settings=settings)
        return self._instances["scenario_service"]

    def get_report_service(self) -> ReportServiceProtocol:
        """Gibt die Singleton-Instanz des ReportService zurück."""
        if "report_service" not in self._instances:
            logger.debug("Erzeuge Singleton-Instanz: ReportService")
            self._instances["report_service"] = self._class_for("report_service_class")(settings=settings)
        return self._instances["report_service"]

    def get_simulation_service(self) -> SimulationServiceProtocol:
        """Gibt die Singleton-Instanz des SimulationService zurück."""
        if "simulation_service" not in self._instances:
            logger.debug("Erzeuge Singleton-Instanz: SimulationService")
            self._instances["simulation_service"] = self._class_for("simulation_service_class")(
                scenario_service=self.get_scenario_service(),
                report_service=self.get_report_service(),
                settings=settings,
            )
        return self._instances["simulation_service"]

    def get_sweep_service(self) -> SweepServiceProtocol:
        """Gibt die Singleton-Instanz des SweepService zurück."""
        if "sweep_service" not in self._instances:
            logger.debug("Erzeuge Singleton-Instanz: SweepService")
            self._instances["sweep_service"] = self._class_for("sweep_service_class")(
                scenario_service=self.get_scenario_service(),
                simulation_service=self.get_simulation_service(),
                report_service=self.get_report_service(),
                settings=settings,
            )
        return self._instances["sweep_service"]
