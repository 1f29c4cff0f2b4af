"""
Gemeinsame Fixtures: Referenzkoeffizienten, Festlegungsabbildungen und gelöste Läufe.

Die Gitter sind bewusst grob (41 Reifegradknoten, Δt = 0.1), damit die sitzungsweit geteilten
Lösungen in wenigen Sekunden entstehen.
"""

from pathlib import Path

import numpy as np
import pytest

from maturity_sim.models.scenario import Scenario
from maturity_sim.services.commitment_service import build_commitment_maps
from maturity_sim.services.model_service import (
    build_power_coefficients,
    compatible_initial_data,
    zero_initial_data,
)
from maturity_sim.services.scenario_service import ScenarioService
from maturity_sim.services.solver_service import build_maturity_grid, solve
from maturity_sim.utils.grids import graded_maturity_grid

SMALL_NODES = 41
SMALL_CELL = 1e-3
SMALL_DT = 0.1
SMALL_HORIZON = 3.0


def canonical_mu_bar(m):
    return 0.01 * (1.0 - np.asarray(m, dtype=float))


@pytest.fixture(scope="session")
def canonical_coeffs():
    """Referenzkoeffizienten: V=0.2m, τ≡1, g=m/2, δ=0.05, γ=0.1, Hill β₀=0.04, θ=0.5, n=2."""
    return build_power_coefficients()


@pytest.fixture(scope="session")
def unstable_coeffs():
    return build_power_coefficients(beta0=0.06)


@pytest.fixture(scope="session")
def canonical_maps(canonical_coeffs):
    return build_commitment_maps(canonical_coeffs, graded_maturity_grid(SMALL_NODES, SMALL_CELL))


@pytest.fixture(scope="session")
def canonical_data(canonical_coeffs):
    return compatible_initial_data(canonical_coeffs, canonical_mu_bar, label="canonical")


@pytest.fixture(scope="session")
def small_grid(canonical_maps):
    return build_maturity_grid(SMALL_NODES, SMALL_CELL, canonical_maps.g_one)


@pytest.fixture(scope="session")
def canonical_solution(canonical_data, canonical_maps, small_grid):
    """Gelöster Referenzlauf auf [0, 3] mit Δt = 0.1."""
    return solve(canonical_data, canonical_maps, SMALL_HORIZON, dt=SMALL_DT, maturities=small_grid)


@pytest.fixture(scope="session")
def trivial_solution(canonical_maps, small_grid):
    return solve(zero_initial_data(), canonical_maps, 2.0, dt=SMALL_DT, maturities=small_grid)


@pytest.fixture
def scenario_service():
    return ScenarioService()


@pytest.fixture
def small_scenario(scenario_service) -> Scenario:
    """Preset ``linear_stable`` mit grobem Gitter und kurzem Horizont."""
    data = scenario_service.load_preset("linear_stable").model_dump()
    data["grid"].update({"maturity_nodes": SMALL_NODES, "smallest_cell": SMALL_CELL, "dt": SMALL_DT})
    data["run"].update({"horizon": 2.0, "sweep_horizon": 2.0})
    return Scenario.model_validate(data)


@pytest.fixture
def small_scenario_file(tmp_path, scenario_service, small_scenario) -> Path:
    path = tmp_path / "small.yaml"
    scenario_service.write_scenario(small_scenario, path)
    return path
