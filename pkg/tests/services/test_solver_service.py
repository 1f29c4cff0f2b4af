"""
Tests für den Löser der integrierten Formulierung (Operator H, Picard-Fenster, Felder N und P).
"""

import numpy as np
import pytest

from maturity_sim.errors import ConvergenceError, FieldRangeError, NonFiniteError, WindowCollapseError
from maturity_sim.services.analysis_service import invariance_sequence
from maturity_sim.services.model_service import initial_data_from_functions
from maturity_sim.services.solver_service import (
    IntegratedOperator,
    IntegratedSolver,
    SolutionField,
    _trapezoid,
    build_maturity_grid,
    build_operator,
    default_dt,
    eval_field,
    gamma_bar_values,
    picard_step,
    seam_jumps,
    solve,
    source_F,
    source_G,
)
from maturity_sim.utils.grids import refine_maturity_grid

from ..conftest import SMALL_CELL, SMALL_DT, SMALL_HORIZON, SMALL_NODES, canonical_mu_bar

ZETA = 4.0 * np.exp(-0.3)


@pytest.fixture(scope="module")
def short_operator(canonical_data, canonical_maps, small_grid):
    return IntegratedOperator(canonical_data, canonical_maps, small_grid, SMALL_DT, 10)


@pytest.mark.unit
class TestSolutionField:
    def test_eval_is_exact_at_nodes(self, canonical_solution):
        N = canonical_solution.N
        for k in (0, N.origin_index, N.times.size - 1):
            for j in (0, 7, N.maturities.size - 1):
                assert eval_field(N, N.times[k], N.maturities[j]).item() == pytest.approx(N.values[k, j], rel=1e-12)

    def test_history_equals_mu_bar(self, canonical_solution):
        N = canonical_solution.N
        m = np.array([0.0, 0.3, 0.77, 1.0])
        np.testing.assert_allclose(N.eval(-0.5, m), canonical_mu_bar(m), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(N.eval(0.0, m), canonical_mu_bar(m), rtol=1e-12, atol=1e-15)

    def test_history_reaches_tau_max(self, canonical_solution, canonical_maps):
        N = canonical_solution.N
        assert N.times[0] <= -canonical_maps.tau_max
        assert N.times[N.origin_index] == pytest.approx(0.0, abs=1e-12)
        assert N.horizon == pytest.approx(SMALL_HORIZON)

    @pytest.mark.parametrize("t, m", [(SMALL_HORIZON + 1.0, 0.5), (-5.0, 0.5), (1.0, 1.5), (1.0, -0.1)])
    def test_out_of_range(self, canonical_solution, t, m):
        with pytest.raises(FieldRangeError):
            canonical_solution.N.eval(t, m)

    def test_rejects_non_finite_values(self):
        values = np.zeros((3, 2))
        values[1, 1] = np.inf
        with pytest.raises(NonFiniteError):
            SolutionField(np.array([-0.1, 0.0, 0.1]), np.array([0.0, 1.0]), values, 1)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            SolutionField(np.array([0.0, 0.1]), np.array([0.0, 1.0]), np.zeros((3, 2)), 0)

    def test_sup_norms_exclude_origin(self):
        field = SolutionField(
            np.array([-0.1, 0.0, 0.1]), np.array([0.0, 0.5, 1.0]), np.array([[9, 9, 9], [5, 1, 2], [4, 3, 0.0]]), 1
        )
        np.testing.assert_array_equal(field.sup_norms(), [5.0, 4.0])
        np.testing.assert_array_equal(field.sup_norms(exclude_origin=True), [2.0, 3.0])


@pytest.mark.unit
class TestSourceTerms:
    def test_delayed_branches_for_large_t(self, canonical_data, canonical_maps):
        m = np.array([0.2, 0.7])
        x = np.array([0.01, 0.01])
        hill = 0.04 * 0.25 / (0.25 + 1e-4)
        np.testing.assert_allclose(source_F(5.0, m, x, canonical_maps, canonical_data), [ZETA * hill * 0.01, 0.0])
        expected_g = np.exp(-0.3) * hill * 0.01
        np.testing.assert_allclose(source_G(5.0, m, x, canonical_maps, canonical_data), [expected_g, expected_g])

    def test_seam_jumps_vanish_for_compatible_data(self, canonical_data, canonical_maps, small_grid):
        jump_f, jump_g = seam_jumps(canonical_data, canonical_maps, small_grid)
        assert jump_f < 1e-10
        assert jump_g < 1e-10

    def test_seam_jumps_detect_incompatible_data(self, canonical_maps, small_grid):
        data = initial_data_from_functions(canonical_mu_bar, lambda m: np.zeros(np.shape(m)))
        jump_f, jump_g = seam_jumps(data, canonical_maps, small_grid)
        assert jump_f > 1e-4
        assert jump_g > 1e-5

    def test_gamma_bar_quadrature(self, canonical_maps):
        # Γ(m,a) = e^{−a}: Γ̄(m) = 1 − e^{−τ(Θ(m))} = 1 − e^{−1}
        data = initial_data_from_functions(lambda m: np.zeros(np.shape(m)), lambda m: np.ones(np.shape(m)), 1.0)
        np.testing.assert_allclose(gamma_bar_values(data, canonical_maps, np.array([0.1, 0.9])), 1.0 - np.exp(-1.0))


@pytest.mark.unit
class TestOperator:
    def test_grid_and_history(self, short_operator, canonical_maps):
        assert short_operator.origin_index == 10
        assert short_operator.times[0] == pytest.approx(-1.0)
        assert short_operator.times[-1] == pytest.approx(1.0)
        assert canonical_maps.g_one in short_operator.maturities

    def test_resting_survival_closed_form(self, short_operator):
        lags = np.arange(11) * SMALL_DT
        np.testing.assert_allclose(short_operator.resting_survival, np.exp(-0.25 * lags)[:, None] * np.ones((1, short_operator.maturities.size)))

    def test_characteristics_closed_form(self, short_operator):
        lags = np.arange(11) * SMALL_DT
        expected = short_operator.maturities[None, :] * np.exp(-0.2 * lags)[:, None]
        np.testing.assert_allclose(short_operator.chars, expected, rtol=1e-14)

    def test_initial_values(self, short_operator):
        values = short_operator.initial_values()
        np.testing.assert_allclose(values[: short_operator.origin_index + 1], canonical_mu_bar(short_operator.maturities)[None, :] * np.ones((11, 1)))
        assert np.all(values[short_operator.origin_index + 1 :] == 0.0)

    def test_first_row_is_mu_bar(self, short_operator):
        applied = short_operator.apply(short_operator.initial_values())
        np.testing.assert_allclose(applied[short_operator.origin_index], short_operator.mu_bar_nodes)

    def test_build_operator_defaults(self, canonical_data, canonical_maps, small_grid):
        assert default_dt(canonical_maps) == pytest.approx(0.05)
        op = build_operator(canonical_data, canonical_maps, 0.5, maturities=small_grid)
        assert op.dt == pytest.approx(0.05)
        assert op.steps == 10


@pytest.mark.integration
class TestSolve:
    def test_fixed_point_residual(self, canonical_solution):
        N = canonical_solution.N
        assert canonical_solution.operator.residual(N.values) < 1e-8

    def test_diagnostics(self, canonical_solution):
        diagnostics = canonical_solution.diagnostics
        assert diagnostics.windows
        assert diagnostics.total_iterations >= len(diagnostics.windows)
        assert diagnostics.window_failures == 0
        assert diagnostics.k_tilde == pytest.approx(1.0)
        assert diagnostics.zeta_norm == pytest.approx(ZETA, abs=1e-8)
        assert diagnostics.seam_jump_F < 1e-10
        assert diagnostics.windows[-1].stop == pytest.approx(SMALL_HORIZON)
        assert all(record.contraction_estimate <= 0.5 + 1e-12 for record in diagnostics.windows)

    def test_result_unpacks(self, canonical_solution):
        N, P = canonical_solution
        assert N.name == "N" and P.name == "P"
        assert P.origin_index == 0
        np.testing.assert_allclose(P.times, N.future_times)

    def test_initial_proliferating_density_is_gamma_bar(self, canonical_solution, canonical_data, canonical_maps):
        P = canonical_solution.P
        expected = gamma_bar_values(canonical_data, canonical_maps, P.maturities)
        np.testing.assert_allclose(P.values[0], expected, rtol=1e-12)

    def test_solution_is_positive_and_bounded(self, canonical_solution):
        N, P = canonical_solution
        assert N.future_values.min() >= -1e-12
        assert P.future_values.min() >= -1e-12
        assert N.future_values.max() <= 0.01 * (1.0 + 1e-6)

    def test_picard_step_keeps_solution(self, canonical_solution, canonical_data, canonical_maps):
        N = canonical_solution.N
        stepped = picard_step(N, canonical_data, canonical_maps, operator=canonical_solution.operator)
        assert np.max(np.abs(stepped.future_values - N.future_values)) < 1e-8

    def test_restarted_picard_step_keeps_solution(self, canonical_solution, canonical_data, canonical_maps):
        N = canonical_solution.N
        stepped = picard_step(N, canonical_data, canonical_maps, start_time=1.0, operator=canonical_solution.operator)
        np.testing.assert_array_equal(stepped.values[: N.origin_index + 10], N.values[: N.origin_index + 10])
        # Interpolation von N(t₀,·) in m: Fehler O(h²) mit der größten Zelle h
        h_max = float(np.max(np.diff(N.maturities)))
        deviation = np.max(np.abs(stepped.future_values - N.future_values))
        assert deviation <= h_max**2 * np.max(np.abs(N.future_values))

    def test_picard_step_rejects_foreign_grid(self, canonical_solution, canonical_data, canonical_maps, short_operator):
        with pytest.raises(FieldRangeError):
            picard_step(canonical_solution.N, canonical_data, canonical_maps, operator=short_operator)


@pytest.mark.integration
def test_trivial_equilibrium(trivial_solution):
    N, P = trivial_solution
    assert np.max(np.abs(N.values)) < 1e-12
    assert np.max(np.abs(P.values)) < 1e-12


@pytest.mark.unit
def test_window_collapse(short_operator):
    solver = IntegratedSolver(short_operator, window_safety=1e-6)
    with pytest.raises(WindowCollapseError) as info:
        solver.solve()
    assert info.value.context["window_start"] == pytest.approx(0.0)


@pytest.mark.unit
def test_iteration_cap(short_operator):
    solver = IntegratedSolver(short_operator, max_iterations=1)
    with pytest.raises(ConvergenceError) as info:
        solver.solve()
    assert info.value.context["iterations"] == 1


@pytest.mark.unit
def test_plan_window_respects_contraction_target(short_operator):
    solver = IntegratedSolver(short_operator, window_safety=0.05, max_window_steps=40)
    window = solver.plan_window(1, 40, radius=1.0)
    per_step = (1.0 + ZETA) * 0.04 * SMALL_DT
    assert window.steps == int(0.05 // per_step)
    assert window.contraction_estimate <= 0.05
    assert window.length == pytest.approx(window.steps * SMALL_DT)


@pytest.mark.unit
def test_build_maturity_grid_adds_kink():
    grid = build_maturity_grid(11, 0.1, 0.45)
    assert grid.size == 12
    assert 0.45 in grid
    assert build_maturity_grid(11, 0.1, 1.0).size == 11


@pytest.mark.integration
def test_solve_is_deterministic(canonical_data, canonical_maps, small_grid):
    first = solve(canonical_data, canonical_maps, 0.5, dt=SMALL_DT, maturities=small_grid)
    second = solve(canonical_data, canonical_maps, 0.5, dt=SMALL_DT, maturities=small_grid)
    np.testing.assert_array_equal(first.N.values, second.N.values)
    np.testing.assert_array_equal(first.P.values, second.P.values)


def _restart_deviation(result, data, maps, start_time):
    N = result.N
    stepped = picard_step(N, data, maps, start_time=start_time, operator=result.operator)
    return float(np.max(np.abs(stepped.future_values - N.future_values)))


@pytest.mark.slow
def test_restart_deviation_shrinks_with_grid(canonical_data, canonical_maps, small_grid):
    coarse = solve(canonical_data, canonical_maps, 1.5, dt=SMALL_DT, maturities=small_grid)
    fine_grid = build_maturity_grid(*refine_maturity_grid(SMALL_NODES, SMALL_CELL), canonical_maps.g_one)
    fine = solve(canonical_data, canonical_maps, 1.5, dt=SMALL_DT, maturities=fine_grid)
    coarse_deviation = _restart_deviation(coarse, canonical_data, canonical_maps, 1.0)
    fine_deviation = _restart_deviation(fine, canonical_data, canonical_maps, 1.0)
    # mindestens lineare Konvergenz in h, oberhalb der Picard-Toleranz
    assert fine_deviation <= max(0.75 * coarse_deviation, 1e-8)


@pytest.mark.integration
def test_observed_picard_ratio_respects_contraction_estimate(canonical_solution):
    observed = [record for record in canonical_solution.diagnostics.windows if record.max_observed_ratio is not None]
    assert observed
    for record in observed:
        assert record.max_observed_ratio <= record.contraction_estimate + 1e-6


@pytest.mark.integration
def test_step_from_kernel_term_is_first_invariance_iterate(canonical_solution, canonical_data, canonical_maps):
    op = canonical_solution.operator
    values = op.initial_values()
    values[op.origin_index :] = op.kernel_term
    stepped = picard_step(op.field(values), canonical_data, canonical_maps, operator=op)
    norms = invariance_sequence(canonical_data, canonical_maps, 1, SMALL_HORIZON, operator=op)
    first = float(np.max(np.abs(stepped.future_values)))
    assert first == pytest.approx(norms[1], rel=1e-12)
    assert first <= 0.01 * (1.0 + 1e-6)


@pytest.mark.unit
def test_panel_sums_are_exact_for_linear_integrands():
    t = np.arange(11) * SMALL_DT
    values = np.stack([2.0 * t + 1.0, 3.0 - t], axis=1)
    np.testing.assert_allclose(_trapezoid(values, SMALL_DT), [2.0, 2.5], rtol=1e-14)
    np.testing.assert_array_equal(_trapezoid(values[:1], SMALL_DT), [0.0, 0.0])
