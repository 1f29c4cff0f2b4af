"""
Unit-Tests für den charakteristischen Fluss und die Überlebenskerne gegen geschlossene Formen.
"""

import numpy as np
import pytest

from maturity_sim.errors import CoefficientError, DomainError, QuadratureError
from maturity_sim.models.functions import ConstantFunction, PowerFunction, TabulatedFunction
from maturity_sim.services.flow_service import (
    CharacteristicFlow,
    SurvivalKernel,
    chi,
    survival_kernel,
    time_of_flight,
)
from maturity_sim.utils.grids import graded_maturity_grid

LINEAR = PowerFunction(alpha=0.2, p=1.0)
CURVED = PowerFunction(alpha=0.3, p=1.5)


@pytest.fixture(scope="module")
def linear_flow():
    return CharacteristicFlow(LINEAR)


@pytest.mark.unit
class TestCharacteristicFlow:
    def test_linear_closed_form(self, linear_flow):
        m = graded_maturity_grid(200, 1e-4)
        for s in (-0.5, -1.0, -3.0):
            np.testing.assert_allclose(chi(linear_flow, s, m), m * np.exp(0.2 * s), rtol=0, atol=1e-14)

    def test_power_closed_form(self):
        flow = CharacteristicFlow(CURVED)
        m = np.array([0.0, 0.1, 0.5, 1.0])
        expected = np.where(m > 0, (np.where(m > 0, m, 1.0) ** -0.5 + 0.5 * 0.3 * 2.0) ** -2.0, 0.0)
        np.testing.assert_allclose(flow.chi(-2.0, m), expected, rtol=1e-14)

    def test_numeric_backend_matches_closed_form(self):
        analytic = CharacteristicFlow(CURVED)
        numeric = CharacteristicFlow(CURVED, backend="numeric")
        m = np.array([0.05, 0.3, 0.8, 1.0])
        s = np.array([-0.5, -1.0, -2.0, -4.0])
        np.testing.assert_allclose(numeric.chi(s, m), analytic.chi(s, m), rtol=1e-8)

    def test_numeric_trajectory_matches_closed_form(self):
        analytic = CharacteristicFlow(CURVED)
        numeric = CharacteristicFlow(CURVED, backend="numeric")
        times = np.array([0.0, 0.5, 1.0, 2.5])
        m = np.array([0.0, 0.2, 1.0])
        np.testing.assert_allclose(numeric.trajectory(times, m), analytic.trajectory(times, m), rtol=1e-8)

    def test_chi_stays_in_range_and_fixes_zero(self, linear_flow):
        values = linear_flow.chi(-10.0, np.array([0.0, 0.3, 1.0]))
        assert values[0] == 0.0
        assert np.all((values >= 0.0) & (values <= np.array([0.0, 0.3, 1.0])))

    def test_chi_rejects_positive_time(self, linear_flow):
        with pytest.raises(DomainError):
            linear_flow.chi(0.5, 0.3)

    def test_chi_rejects_maturity_outside_unit_interval(self, linear_flow):
        with pytest.raises(DomainError):
            linear_flow.chi(-1.0, 1.5)

    def test_analytic_backend_requires_power_family(self):
        table = TabulatedFunction(nodes=(0.0, 1.0), values=(0.0, 0.2))
        with pytest.raises(CoefficientError):
            CharacteristicFlow(table, backend="analytic")


@pytest.mark.unit
class TestTimeOfFlight:
    def test_linear_closed_form(self, linear_flow):
        assert float(time_of_flight(linear_flow, 0.25, 0.5)) == pytest.approx(np.log(2.0) / 0.2)

    def test_power_closed_form(self):
        flow = CharacteristicFlow(CURVED)
        expected = (0.25**-0.5 - 1.0) / (0.3 * 0.5)
        assert float(flow.time_of_flight(0.25, 1.0)) == pytest.approx(expected)

    def test_tabulated_velocity_uses_quadrature(self):
        nodes = tuple(np.linspace(0.0, 1.0, 21))
        flow = CharacteristicFlow(TabulatedFunction(nodes=nodes, values=tuple(0.2 * np.asarray(nodes))))
        assert flow.backend == "numeric"
        assert float(flow.time_of_flight(0.25, 0.5)) == pytest.approx(np.log(2.0) / 0.2, rel=1e-8)

    def test_divergence_at_zero(self, linear_flow):
        with pytest.raises(DomainError):
            linear_flow.time_of_flight(0.0, 0.5)

    def test_reversed_bounds(self, linear_flow):
        with pytest.raises(DomainError):
            linear_flow.time_of_flight(0.6, 0.5)

    def test_flight_time_inverts_chi(self, linear_flow):
        m = 0.8
        s = -1.7
        assert float(linear_flow.time_of_flight(linear_flow.chi(s, m), m)) == pytest.approx(1.7)


@pytest.mark.unit
class TestSurvivalKernel:
    def test_resting_kernel_closed_form(self, linear_flow):
        kernel = SurvivalKernel(linear_flow, ConstantFunction(value=0.05), "resting")
        t = np.array([0.0, 0.5, 2.0, 7.3])
        np.testing.assert_allclose(survival_kernel(kernel, t, 0.4), np.exp(-0.25 * t), rtol=1e-12)

    def test_proliferating_kernel_closed_form(self, linear_flow):
        kernel = SurvivalKernel(linear_flow, ConstantFunction(value=0.1), "proliferating")
        np.testing.assert_allclose(kernel(np.array([1.0, 3.0]), 0.9), np.exp(-0.3 * np.array([1.0, 3.0])))

    def test_table_matches_pointwise_values(self, linear_flow):
        kernel = SurvivalKernel(linear_flow, lambda m: 0.1 + m, "resting")
        m = np.array([0.0, 0.3, 1.0])
        table = kernel.table(0.25, 8, m)
        assert table.shape == (9, 3)
        np.testing.assert_allclose(table[0], 1.0)
        np.testing.assert_allclose(table[-1], kernel(2.0, m), rtol=1e-10)

    def test_maturity_dependent_rate(self, linear_flow):
        # δ(m) = m: ∫₀ᵗ χ(−s,m) ds = m(1 − e^{−0.2t})/0.2
        kernel = SurvivalKernel(linear_flow, lambda m: np.asarray(m, dtype=float), "auxiliary")
        t, m = 2.0, 0.6
        expected = np.exp(-m * (1.0 - np.exp(-0.2 * t)) / 0.2)
        assert float(kernel(t, m)) == pytest.approx(expected, rel=1e-10)

    def test_kernel_rejects_negative_time(self, linear_flow):
        kernel = SurvivalKernel(linear_flow, ConstantFunction(value=0.05), "resting")
        with pytest.raises(DomainError):
            kernel(-1.0, 0.5)

    def test_non_finite_integrand(self, linear_flow):
        kernel = SurvivalKernel(linear_flow, lambda m: np.full(np.shape(m), np.nan), "auxiliary")
        with pytest.raises(QuadratureError) as info:
            kernel(np.array([1.0, 2.0]), np.array([0.5, 0.5]))
        assert info.value.context["kernel"] == "auxiliary"
