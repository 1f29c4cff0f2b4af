"""
Tests für den SimulationService: Validierung, Tabellen, Simulation und Audit auf grobem Gitter.
"""

import json

import pytest

from maturity_sim.errors import CoefficientError
from maturity_sim.models.scenario import Scenario
from maturity_sim.services.report_service import FIELDS_FILE, MAPS_FILE, ReportService
from maturity_sim.services.simulation_service import (
    AUDIT_FILE,
    DIAGNOSTICS_FILE,
    VALIDATION_FILE,
    SimulationService,
)

from ..conftest import SMALL_CELL, SMALL_DT, SMALL_NODES


@pytest.fixture
def simulation_service(scenario_service):
    return SimulationService(scenario_service, ReportService())


def _small(scenario_service, preset: str, **model_updates) -> Scenario:
    data = scenario_service.load_preset(preset).model_dump()
    data["grid"].update({"maturity_nodes": SMALL_NODES, "smallest_cell": SMALL_CELL, "dt": SMALL_DT})
    data["run"]["horizon"] = 2.0
    data["model"].update(model_updates)
    return Scenario.model_validate(data)


@pytest.mark.unit
class TestValidate:
    def test_valid_scenario(self, simulation_service, small_scenario, tmp_path):
        report = simulation_service.validate(small_scenario, tmp_path)
        assert report.passed
        assert json.loads((tmp_path / VALIDATION_FILE).read_text(encoding="utf-8"))["grid_resolution"] == 1000

    def test_violated_hypothesis_still_writes_report(self, simulation_service, scenario_service, tmp_path):
        scenario = _small(scenario_service, "linear_stable", division_map={"kind": "affine", "intercept": 0.0, "slope": 1.5})
        with pytest.raises(CoefficientError) as info:
            simulation_service.validate(scenario, tmp_path)
        assert "division_map_below_identity" in info.value.context["failed"]
        assert (tmp_path / VALIDATION_FILE).is_file()

    def test_prepare_rejects_invalid_coefficients(self, simulation_service, scenario_service):
        scenario = _small(scenario_service, "linear_stable", division_map={"kind": "affine", "intercept": 0.0, "slope": 1.5})
        with pytest.raises(CoefficientError):
            simulation_service.prepare(scenario)


@pytest.mark.unit
def test_dump_maps(simulation_service, small_scenario, tmp_path):
    path = simulation_service.dump_maps(small_scenario, tmp_path)
    assert path == tmp_path / MAPS_FILE
    assert path.read_text(encoding="utf-8").startswith("m,theta,delta,")


@pytest.mark.unit
def test_certificate_uses_data_ball_without_eps(simulation_service, scenario_service, small_scenario):
    data = small_scenario.model_dump()
    data["run"]["eps_neighborhood"] = None
    scenario = Scenario.model_validate(data)
    coeffs, _, maps, initial = simulation_service.prepare(scenario)
    certificate, inside = simulation_service.certificate_for(scenario, coeffs, maps, initial)
    assert certificate.eps_neighborhood == pytest.approx(0.01)
    assert inside


@pytest.mark.integration
class TestRunSimulation:
    def test_stable_run(self, simulation_service, small_scenario, tmp_path):
        diagnostics = simulation_service.run_simulation(small_scenario, tmp_path)
        assert (tmp_path / FIELDS_FILE).is_file()
        written = json.loads((tmp_path / DIAGNOSTICS_FILE).read_text(encoding="utf-8"))
        assert written["scenario"] == "linear_stable"
        assert written["certificate"]["verdict_local"] is True
        assert not diagnostics.trivial_equilibrium
        assert diagnostics.residual.residual < 1e-8
        assert diagnostics.residual.refined_residual is None
        assert diagnostics.positivity.passed
        assert diagnostics.decay.envelope_checked
        assert diagnostics.decay.envelope_violations == 0
        assert diagnostics.sup_N <= 0.01 * (1.0 + 1e-6)
        assert diagnostics.invariance is None

    def test_runs_are_reproducible(self, simulation_service, small_scenario, tmp_path):
        simulation_service.run_simulation(small_scenario, tmp_path / "a")
        simulation_service.run_simulation(small_scenario, tmp_path / "b")
        assert (tmp_path / "a" / FIELDS_FILE).read_bytes() == (tmp_path / "b" / FIELDS_FILE).read_bytes()

    def test_trivial_equilibrium(self, simulation_service, scenario_service, tmp_path):
        diagnostics = simulation_service.run_simulation(_small(scenario_service, "trivial"), tmp_path)
        assert diagnostics.trivial_equilibrium
        assert diagnostics.sup_N == 0.0
        assert diagnostics.sup_P == 0.0
        assert diagnostics.decay.infinite


@pytest.mark.slow
def test_audit_run(simulation_service, small_scenario, tmp_path):
    diagnostics = simulation_service.run_simulation(small_scenario, tmp_path, audit=True, threads=2)
    assert diagnostics.invariance is not None and diagnostics.invariance.passed
    assert diagnostics.growth.passed
    assert diagnostics.balance.relative_defect < 0.05
    assert diagnostics.residual.refined_residual < 1e-3
    audit = json.loads((tmp_path / AUDIT_FILE).read_text(encoding="utf-8"))
    assert set(audit["ha_defects"]) == {"zero", "beta_at_zero", "half", "identity"}
    assert audit["ha_defects"]["zero"] < 1e-8
    assert len(audit["invariance_sequence"]) == 4
    assert audit["continuity"]["bound_holds"] is True
