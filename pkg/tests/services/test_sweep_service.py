"""
Tests für den SweepService (Gitterpunkte, leere Achsen, Fehlerzeilen, Urteile über β₀).
"""

import json
from unittest.mock import MagicMock

import pytest

from maturity_sim.errors import CoefficientError
from maturity_sim.models.scenario import SweepAxis
from maturity_sim.services.report_service import ReportService
from maturity_sim.services.simulation_service import SimulationService
from maturity_sim.services.sweep_service import RESULT_COLUMNS, SWEEP_FILE, SweepService


@pytest.fixture
def sweep_service(scenario_service):
    report_service = ReportService()
    simulation = SimulationService(scenario_service, report_service)
    return SweepService(scenario_service, simulation, report_service)


@pytest.mark.unit
class TestGridPoints:
    def test_cartesian_product(self):
        axes = [
            SweepAxis(name="beta0", start=0.01, stop=0.02, num=2),
            SweepAxis(name="gamma0", start=0.1, stop=0.3, num=3),
        ]
        points = SweepService.grid_points(axes)
        assert len(points) == 6
        assert points[0] == {"beta0": 0.01, "gamma0": 0.1}
        assert points[-1] == pytest.approx({"beta0": 0.02, "gamma0": 0.3})

    def test_no_axes(self):
        assert SweepService.grid_points([]) == []

    def test_empty_axis(self):
        assert SweepService.grid_points([SweepAxis(name="beta0", start=0.01, stop=0.05, num=0)]) == []


@pytest.mark.unit
def test_empty_sweep_writes_header_only(sweep_service, small_scenario, tmp_path):
    rows = sweep_service.sweep_stability(
        small_scenario, tmp_path, axes=[SweepAxis(name="beta0", start=0.01, stop=0.05, num=0)]
    )
    assert rows == []
    assert (tmp_path / SWEEP_FILE).read_text(encoding="utf-8") == ",".join(["beta0"] + RESULT_COLUMNS) + "\n"


@pytest.mark.unit
def test_failed_point_is_recorded(scenario_service, small_scenario):
    simulation = MagicMock(spec=SimulationService)
    simulation.prepare.side_effect = CoefficientError("Strukturhypothesen verletzt")
    service = SweepService(scenario_service, simulation, ReportService())
    row = service.evaluate_point(small_scenario, {"beta0": 0.02}, 1.0)
    assert row.verdict is None
    assert row.error == "CoefficientError: Strukturhypothesen verletzt"


@pytest.mark.integration
def test_beta0_verdicts(sweep_service, small_scenario, tmp_path):
    axis = SweepAxis(name="beta0", start=0.03, stop=0.06, num=2)
    rows = sweep_service.sweep_stability(small_scenario, tmp_path, axes=[axis], threads=2)
    assert [row.verdict for row in rows] == [True, False]
    assert rows[0].margin == pytest.approx(0.25 - 0.03 * 5.0)
    assert rows[0].decay_rate > 0.0
    assert all(row.agreement for row in rows)
    lines = (tmp_path / SWEEP_FILE).read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert lines[1].split(",")[1] == "true"
    point = json.loads((tmp_path / "points" / "point_0001.json").read_text(encoding="utf-8"))
    assert point["verdict"] is False


@pytest.mark.slow
def test_scenario_axes_are_default(sweep_service, small_scenario, tmp_path):
    rows = sweep_service.sweep_stability(small_scenario, tmp_path)
    assert [row.point["beta0"] for row in rows] == pytest.approx([0.01, 0.02, 0.03, 0.04, 0.05])
    assert all(row.verdict for row in rows[:4])
    assert rows[4].margin == pytest.approx(0.0, abs=1e-9)


@pytest.mark.unit
def test_unexpected_error_is_recorded(scenario_service, small_scenario):
    simulation = MagicMock(spec=SimulationService)
    simulation.prepare.side_effect = ValueError("Gitter passt nicht")
    service = SweepService(scenario_service, simulation, ReportService())
    row = service.evaluate_point(small_scenario, {"beta0": 0.02}, 1.0)
    assert row.verdict is None
    assert row.error == "ValueError: Gitter passt nicht"


@pytest.mark.unit
def test_point_files_are_written_as_points_finish(scenario_service, small_scenario, tmp_path):
    seen: list[bool] = []

    def fail_after_check(scenario):
        seen.append((tmp_path / "points" / "point_0000.json").is_file())
        raise ValueError("abgebrochen")

    simulation = MagicMock(spec=SimulationService)
    simulation.prepare.side_effect = fail_after_check
    service = SweepService(scenario_service, simulation, ReportService())
    rows = service.sweep_stability(
        small_scenario, tmp_path, axes=[SweepAxis(name="beta0", start=0.01, stop=0.02, num=2)], threads=1
    )
    assert seen == [False, True]
    assert [row.error for row in rows] == ["ValueError: abgebrochen"] * 2
    assert json.loads((tmp_path / "points" / "point_0001.json").read_text(encoding="utf-8"))["error"]
