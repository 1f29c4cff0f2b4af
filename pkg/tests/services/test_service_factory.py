"""
Tests für die ServiceFactory und die Protokoll-Konformität der Services.
"""

from unittest.mock import MagicMock

import pytest

from maturity_sim.services.factory_config import create_service_factory
from maturity_sim.services.protocols import (
    ReportServiceProtocol,
    ScenarioServiceProtocol,
    SimulationServiceProtocol,
    SweepServiceProtocol,
)
from maturity_sim.services.report_service import ReportService
from maturity_sim.services.scenario_service import ScenarioService
from maturity_sim.services.service_factory import ServiceFactory
from maturity_sim.services.simulation_service import SimulationService
from maturity_sim.services.sweep_service import SweepService


@pytest.mark.unit
def test_factory_returns_singletons():
    factory = create_service_factory()
    assert factory.get_scenario_service() is factory.get_scenario_service()
    assert factory.get_sweep_service() is factory.get_sweep_service()
    simulation = factory.get_simulation_service()
    assert simulation.scenario_service is factory.get_scenario_service()
    assert simulation.report_service is factory.get_report_service()


@pytest.mark.unit
def test_services_satisfy_protocols():
    factory = create_service_factory()
    assert isinstance(factory.get_scenario_service(), ScenarioServiceProtocol)
    assert isinstance(factory.get_report_service(), ReportServiceProtocol)
    assert isinstance(factory.get_simulation_service(), SimulationServiceProtocol)
    assert isinstance(factory.get_sweep_service(), SweepServiceProtocol)


@pytest.mark.unit
def test_missing_class_raises():
    factory = ServiceFactory(scenario_service_class=ScenarioService)
    with pytest.raises(ValueError, match="report_service_class"):
        factory.get_report_service()


@pytest.mark.unit
def test_classes_can_be_replaced_by_mocks():
    report_class = MagicMock(return_value=MagicMock(spec=ReportService))
    factory = ServiceFactory(
        scenario_service_class=ScenarioService,
        report_service_class=report_class,
        simulation_service_class=SimulationService,
        sweep_service_class=SweepService,
    )
    simulation = factory.get_simulation_service()
    assert simulation.report_service is report_class.return_value
    report_class.assert_called_once()
