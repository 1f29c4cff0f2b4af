"""
Unit-Tests für die Koeffizientenprüfung und die Konstruktoren in model_service.
"""

import numpy as np
import pytest

from maturity_sim.errors import CoefficientError
from maturity_sim.models.coefficients import CallableReintroduction, ModelCoefficients
from maturity_sim.models.functions import AffineFunction, ConstantFunction, PowerFunction, TabulatedFunction
from maturity_sim.services.model_service import (
    beta_bound,
    build_power_coefficients,
    check_compatibility,
    check_regulation,
    compatible_initial_data,
    eval_beta,
    initial_data_from_functions,
    lipschitz_constant,
    validate_coefficients,
    zero_initial_data,
)


def _with_rate(coeffs: ModelCoefficients, func) -> ModelCoefficients:
    return coeffs.model_copy(update={"reintroduction": CallableReintroduction(func=func)})


@pytest.mark.unit
class TestValidateCoefficients:
    def test_canonical_coefficients_pass(self, canonical_coeffs):
        report = validate_coefficients(canonical_coeffs)
        assert report.passed
        assert report.grid_resolution == 1000
        assert report.get("velocity_divergence").status == "pass"

    def test_power_below_one_is_rejected(self):
        coeffs = build_power_coefficients(p=0.5)
        with pytest.raises(CoefficientError) as info:
            validate_coefficients(coeffs)
        assert info.value.context["p"] == 0.5

    def test_power_below_one_reported_without_strict(self):
        report = validate_coefficients(build_power_coefficients(p=0.5), strict=False)
        assert not report.passed
        assert [check.name for check in report.failed()] == ["velocity_divergence"]

    def test_nonpositive_division_age_is_rejected(self):
        with pytest.raises(CoefficientError):
            validate_coefficients(build_power_coefficients(tau=-1.0))

    def test_division_map_above_identity_fails(self):
        report = validate_coefficients(build_power_coefficients(g_slope=1.5), strict=False)
        assert report.get("division_map_below_identity").status == "fail"

    def test_tabulated_velocity_divergence_is_assumed(self, canonical_coeffs):
        nodes = tuple(np.linspace(0.0, 1.0, 11))
        velocity = TabulatedFunction(nodes=nodes, values=tuple(0.2 * np.asarray(nodes)))
        report = validate_coefficients(canonical_coeffs.model_copy(update={"velocity": velocity}))
        assert report.get("velocity_divergence").status == "assumed"
        assert report.passed

    def test_negative_loss_is_reported(self, canonical_coeffs):
        coeffs = canonical_coeffs.model_copy(update={"resting_loss": ConstantFunction(value=-0.1)})
        report = validate_coefficients(coeffs, grid_resolution=50)
        assert report.get("resting_loss_nonnegative").worst_value == pytest.approx(-0.1)

    def test_division_age_condition_needs_positive_margin(self, canonical_coeffs):
        # τ = 6 − 5m, V = 0.2m: τ' + 1/V = 5/m − 5 verschwindet bei m = 1
        coeffs = canonical_coeffs.model_copy(
            update={"velocity": PowerFunction(alpha=0.2, p=1.0), "division_age": AffineFunction(intercept=6.0, slope=-5.0)}
        )
        check = validate_coefficients(coeffs, strict=False).get("division_age_condition")
        assert check.status == "fail"
        assert check.worst_point == pytest.approx(1.0)
        assert check.worst_value == 0.0

    def test_constant_division_map_is_not_increasing(self):
        check = validate_coefficients(build_power_coefficients(g_slope=0.0), strict=False).get("division_map_increasing")
        assert check.status == "fail"
        assert check.worst_value == 0.0


@pytest.mark.unit
def test_eval_beta_at_zero_is_beta0(canonical_coeffs):
    np.testing.assert_allclose(eval_beta(canonical_coeffs, np.linspace(0.0, 1.0, 5), 0.0), 0.04)


@pytest.mark.unit
def test_compatibility(canonical_coeffs, canonical_data):
    assert check_compatibility(canonical_data, canonical_coeffs).passed
    incompatible = initial_data_from_functions(lambda m: 0.01 * (1.0 - m), lambda m: np.zeros(np.shape(m)))
    report = check_compatibility(incompatible, canonical_coeffs)
    assert not report.passed
    assert report.max_relative_deviation == pytest.approx(1.0)


@pytest.mark.unit
def test_regulation_holds_for_hill(canonical_coeffs):
    report = check_regulation(canonical_coeffs, samples=2000, seed=3)
    assert report.holds
    assert report.seed == 3


@pytest.mark.unit
def test_regulation_violated_for_increasing_rate(canonical_coeffs):
    coeffs = _with_rate(canonical_coeffs, lambda m, x: 0.04 + 0.01 * x)
    report = check_regulation(coeffs, samples=2000, seed=3)
    assert not report.holds
    assert report.max_violation > 0.0
    assert report.worst_x is not None


@pytest.mark.unit
def test_lipschitz_constant(canonical_coeffs):
    assert lipschitz_constant(canonical_coeffs) == (pytest.approx(0.04), "hill")
    steep = build_power_coefficients(n=9.0)
    assert lipschitz_constant(steep)[0] == pytest.approx(0.04 * 64.0 / 36.0)

    empirical, kind = lipschitz_constant(_with_rate(canonical_coeffs, lambda m, x: 0.04 + 0.01 * x))
    assert kind == "empirical"
    assert empirical == pytest.approx(0.06, abs=1e-3)


@pytest.mark.unit
def test_beta_bound(canonical_coeffs):
    assert beta_bound(canonical_coeffs) == pytest.approx(0.04)


@pytest.mark.unit
def test_initial_data_constructors(canonical_coeffs):
    zero = zero_initial_data()
    assert np.all(zero.mu_bar(np.linspace(0.0, 1.0, 4)) == 0.0)

    data = compatible_initial_data(canonical_coeffs, lambda m: 0.01 * (1.0 - m), age_decay=0.5)
    m = np.array([0.0, 0.5])
    gamma0 = canonical_coeffs.beta(m, 0.01 * (1.0 - m)) * 0.01 * (1.0 - m)
    np.testing.assert_allclose(data.gamma_surface(m, 0.0), gamma0)
    np.testing.assert_allclose(data.gamma_surface(m, 2.0), gamma0 * np.exp(-1.0))

    with pytest.raises(CoefficientError):
        initial_data_from_functions(lambda m: m, lambda m: m, age_decay=-1.0)


@pytest.mark.unit
def test_power_coefficients_defaults(canonical_coeffs):
    assert isinstance(canonical_coeffs.velocity, PowerFunction)
    assert canonical_coeffs.reintroduction.n == 2.0
