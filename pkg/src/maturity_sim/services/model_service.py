"""
Koeffizientenprüfung, Hill-Nichtlinearität und Konstruktoren für Koeffizienten und Anfangsdaten.

Alle Funktionen sind rein und ohne gemeinsamen Zustand; sie dürfen parallel aufgerufen werden.
"""

from typing import Callable, Literal, Optional

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from maturity_sim.config.settings import settings
from maturity_sim.errors import CoefficientError
from maturity_sim.models.coefficients import HillReintroduction, InitialData, ModelCoefficients
from maturity_sim.models.functions import AffineFunction, ConstantFunction, PowerFunction
from maturity_sim.models.reports import CompatReport, HypothesisCheck, RegulationReport, ValidationReport
from maturity_sim.utils.grids import validation_grid

LipschitzKind = Literal["hill", "empirical"]


def _worst(values: NDArray[np.float64], grid: NDArray[np.float64]) -> tuple[float, float]:
    index = int(np.argmin(values))
    return float(grid[index]), float(values[index])


def _check(
    name: str, margin: NDArray[np.float64], grid: NDArray[np.float64], detail: str, strict: bool = False
) -> HypothesisCheck:
    """Eine Hypothese gilt, wenn ``margin`` auf dem ganzen Gitter ≥ 0 ist (mit ``strict``: > 0)."""
    point, value = _worst(margin, grid)
    holds = value > 0.0 if strict else value >= 0.0
    status = "pass" if np.all(np.isfinite(margin)) and holds else "fail"
    return HypothesisCheck(name=name, status=status, worst_point=point, worst_value=value, detail=detail)


def validate_coefficients(
    coeffs: ModelCoefficients, grid_resolution: Optional[int] = None, strict: bool = True
) -> ValidationReport:
    """
    Prüft die Strukturhypothesen der Koeffizienten auf einem gleichmäßigen Gitter.

    Geprüft werden V(0)=0 und V>0 auf (0,1], die Divergenz der Flugzeit bei m→0 (nur Potenzfamilie,
    sonst "assumed"), τ>0, τ'(m)+1/V(m)>0 auf (0,1], g streng wachsend, 0 ≤ g(m) ≤ m,
    δ, γ ≥ 0 sowie β₀ ≥ 0 und θ > 0 der Hill-Funktion.

    Args:
        coeffs (ModelCoefficients): Zu prüfende Koeffizienten.
        grid_resolution (int | None): Anzahl der Gitterpunkte, Default aus den Settings (1000).
        strict (bool): Wenn True, führen p<1 und nichtpositives τ zu einem CoefficientError.

    Returns:
        ValidationReport: Ergebnis je Hypothese mit schlechtestem Punkt.

    Raises:
        CoefficientError: Bei ``strict`` und p<1 bzw. τ ≤ 0.
    """
    resolution = grid_resolution or settings.validation_grid_points
    inner = validation_grid(resolution)
    closed = validation_grid(resolution, include_zero=True)
    velocity = coeffs.velocity
    checks: list[HypothesisCheck] = []

    v_inner = velocity(inner)
    v_zero = float(velocity(0.0))
    checks.append(_check("velocity_positive", v_inner, inner, "V(m) > 0 auf (0,1]", strict=True))
    checks.append(
        HypothesisCheck(
            name="velocity_vanishes_at_zero",
            status="pass" if abs(v_zero) <= 1e-14 else "fail",
            worst_point=0.0,
            worst_value=v_zero,
            detail="V(0) = 0",
        )
    )
    if isinstance(velocity, PowerFunction):
        checks.append(
            HypothesisCheck(
                name="velocity_divergence",
                status="pass" if velocity.p >= 1.0 else "fail",
                worst_value=velocity.p,
                detail="Potenzfamilie mit p ≥ 1: ∫ds/V(s) divergiert bei 0",
            )
        )
    else:
        checks.append(
            HypothesisCheck(
                name="velocity_divergence",
                status="assumed",
                detail="Für tabellierte V numerisch nicht prüfbar",
            )
        )

    tau_closed = coeffs.division_age(closed)
    checks.append(_check("division_age_positive", tau_closed, closed, "τ(m) > 0 auf [0,1]", strict=True))
    with np.errstate(divide="ignore"):
        condition = coeffs.division_age.derivative(inner) + 1.0 / v_inner
    checks.append(
        _check(
            "division_age_condition",
            np.where(np.isnan(condition), -np.inf, condition),
            inner,
            "τ'(m) + 1/V(m) > 0",
            strict=True,
        )
    )

    g_closed = coeffs.division_map(closed)
    increments = np.diff(g_closed)
    checks.append(_check("division_map_increasing", increments, closed[1:], "g streng wachsend", strict=True))
    checks.append(_check("division_map_below_identity", closed - g_closed + 1e-14, closed, "g(m) ≤ m"))
    checks.append(_check("division_map_nonnegative", g_closed + 1e-14, closed, "g(m) ≥ 0"))

    checks.append(_check("resting_loss_nonnegative", coeffs.resting_loss(closed), closed, "δ(m) ≥ 0"))
    checks.append(_check("apoptosis_nonnegative", coeffs.apoptosis(closed), closed, "γ(m) ≥ 0"))

    reintroduction = coeffs.reintroduction
    if isinstance(reintroduction, HillReintroduction):
        checks.append(_check("hill_beta0_nonnegative", reintroduction.beta0(closed), closed, "β₀(m) ≥ 0"))
        checks.append(_check("hill_theta_positive", reintroduction.theta(closed), closed, "θ(m) > 0", strict=True))

    report = ValidationReport(grid_resolution=resolution, checks=checks)
    for check in report.failed():
        logger.warning(f"Hypothese verletzt: {check.name} (Punkt {check.worst_point}, Wert {check.worst_value})")
    logger.debug(f"Koeffizientenvalidierung: {len(checks)} Prüfungen, bestanden={report.passed}")

    if strict:
        if report.get("velocity_divergence").status == "fail":
            raise CoefficientError(
                "Potenzfamilie mit p < 1: die Flugzeit von m→0 divergiert nicht",
                p=report.get("velocity_divergence").worst_value,
            )
        if report.get("division_age_positive").status == "fail":
            raise CoefficientError(
                "Teilungsalter τ ist nicht positiv",
                worst_point=report.get("division_age_positive").worst_point,
                worst_value=float(coeffs.division_age(report.get("division_age_positive").worst_point)),
            )
    return report


def eval_beta(coeffs: ModelCoefficients, m: ArrayLike, x: ArrayLike) -> NDArray[np.float64]:
    """
    Wertet die Wiedereintrittsrate β(m,x) aus.

    Beispiel:
        >>> eval_beta(coeffs, 0.3, 0.0)  # = β₀(0.3)
    """
    return coeffs.beta(m, x)


def check_compatibility(
    data: InitialData,
    coeffs: ModelCoefficients,
    tol: float = 1e-8,
    grid_resolution: Optional[int] = None,
) -> CompatReport:
    """
    Prüft Γ(m,0) = β(m,μ̄(m))·μ̄(m) auf dem Gitter.

    Die Abweichung wird relativ zu |β(m,μ̄(m))·μ̄(m)| gemessen, wo diese Größe verschwindet absolut.
    Eine Verletzung ist nur eine Warnung; die Lösbarkeit hängt nicht davon ab.
    """
    grid = validation_grid(grid_resolution or settings.validation_grid_points, include_zero=True)
    mu = np.asarray(data.mu_bar(grid), dtype=float)
    target = coeffs.beta(grid, mu) * mu
    actual = np.asarray(data.gamma_surface(grid, np.zeros_like(grid)), dtype=float)
    scale = np.abs(target)
    deviation = np.where(scale > 0.0, np.abs(actual - target) / np.where(scale > 0.0, scale, 1.0), np.abs(actual - target))
    index = int(np.argmax(deviation))
    worst = float(deviation[index])
    passed = bool(worst <= tol)
    if not passed:
        logger.warning(f"Anfangsdaten nicht verträglich: max. relative Abweichung {worst:.3e} bei m={grid[index]:.4f}")
    return CompatReport(passed=passed, max_relative_deviation=worst, worst_point=float(grid[index]), tolerance=tol)


def check_regulation(
    coeffs: ModelCoefficients, samples: int = 20000, seed: Optional[int] = None, x_max: float = 10.0
) -> RegulationReport:
    """
    Stichprobenprüfung der Regulationshypothese (β(m,x) − β(m,0))·x ≤ 0.

    Args:
        coeffs (ModelCoefficients): Koeffizienten.
        samples (int): Anzahl zufälliger Paare (m,x).
        seed (int | None): Seed des Zufallsgenerators, Default aus den Settings.
        x_max (float): Stichproben für x stammen aus [−x_max, x_max].
    """
    seed = settings.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.0, 1.0, samples)
    x = rng.uniform(-x_max, x_max, samples)
    excess = (coeffs.beta(m, x) - coeffs.beta(m, np.zeros_like(x))) * x
    index = int(np.argmax(excess))
    violation = max(float(excess[index]), 0.0)
    holds = bool(violation <= 1e-14)
    if not holds:
        logger.warning(f"Regulationshypothese verletzt bei m={m[index]:.4f}, x={x[index]:.4f}")
    return RegulationReport(
        holds=holds,
        samples=samples,
        max_violation=violation,
        worst_m=float(m[index]) if not holds else None,
        worst_x=float(x[index]) if not holds else None,
        seed=seed,
    )


def lipschitz_constant(
    coeffs: ModelCoefficients, radius: float = 1.0, grid_resolution: Optional[int] = None
) -> tuple[float, LipschitzKind]:
    """
    Lipschitz-Konstante von x ↦ x·β(m,x), gleichmäßig in m.

    Für die Hill-Funktion ist die Steigung durch sup β₀ · max{1, (n−1)²/(4n)} global beschränkt.
    Für andere Raten wird sie über Differenzenquotienten auf |x| ≤ radius geschätzt ("empirical").

    Returns:
        tuple[float, str]: (L, Art der Konstante)
    """
    grid = validation_grid(grid_resolution or settings.validation_grid_points, include_zero=True)
    reintroduction = coeffs.reintroduction
    if isinstance(reintroduction, HillReintroduction):
        n = reintroduction.n
        factor = max(1.0, (n - 1.0) ** 2 / (4.0 * n))
        return float(np.max(reintroduction.beta0(grid))) * factor, "hill"

    m = grid[:: max(1, len(grid) // 100)]
    x = np.linspace(-radius, radius, 2001)
    mm, xx = np.meshgrid(m, x, indexing="ij")
    flux = xx * coeffs.beta(mm, xx)
    slopes = np.abs(np.diff(flux, axis=1)) / np.diff(x)
    estimate = float(np.max(slopes))
    logger.warning(f"Lipschitz-Konstante empirisch geschätzt: L={estimate:.6g} auf |x| ≤ {radius:g}")
    return estimate, "empirical"


def beta_bound(coeffs: ModelCoefficients, radius: float = 10.0, grid_resolution: Optional[int] = None) -> float:
    """Schranke β̃ ≥ |β(m,x)|; exakt sup β₀ für die Hill-Funktion, sonst Stichprobenmaximum."""
    grid = validation_grid(grid_resolution or settings.validation_grid_points, include_zero=True)
    reintroduction = coeffs.reintroduction
    if isinstance(reintroduction, HillReintroduction):
        return float(np.max(np.abs(reintroduction.beta0(grid))))
    x = np.linspace(-radius, radius, 401)
    mm, xx = np.meshgrid(grid[:: max(1, len(grid) // 100)], x, indexing="ij")
    return float(np.max(np.abs(coeffs.beta(mm, xx))))


def build_power_coefficients(
    alpha: float = 0.2,
    p: float = 1.0,
    tau: float = 1.0,
    g_slope: float = 0.5,
    delta: float = 0.05,
    gamma: float = 0.1,
    beta0: float = 0.04,
    theta: float = 0.5,
    n: float = 2.0,
) -> ModelCoefficients:
    """
    Koeffizienten mit V=α·m^p, konstantem τ, linearem g und Hill-β mit konstanten Parametern.

    Die Defaults beschreiben das stabile Referenzszenario.
    """
    return ModelCoefficients(
        velocity=PowerFunction(alpha=alpha, p=p),
        division_age=ConstantFunction(value=tau),
        division_map=AffineFunction(intercept=0.0, slope=g_slope),
        resting_loss=ConstantFunction(value=delta),
        apoptosis=ConstantFunction(value=gamma),
        reintroduction=HillReintroduction(
            beta0=ConstantFunction(value=beta0), theta=ConstantFunction(value=theta), n=n
        ),
    )


def zero_initial_data() -> InitialData:
    """μ̄ ≡ 0 und Γ ≡ 0."""
    return InitialData(
        mu_bar=lambda m: np.zeros(np.shape(m)),
        gamma_surface=lambda m, a: np.zeros(np.broadcast(np.asarray(m), np.asarray(a)).shape),
        gamma_bar=lambda m: np.zeros(np.shape(m)),
        label="zero",
    )


def initial_data_from_functions(
    mu_bar: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    gamma0: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    age_decay: float = 0.0,
    label: str = "function",
) -> InitialData:
    """Anfangsdaten mit Γ(m,a) = Γ₀(m)·e^{−λa}; Γ̄ wird später per Quadratur bestimmt."""
    if age_decay < 0.0:
        raise CoefficientError("Die Altersabklingrate muss nichtnegativ sein", age_decay=age_decay)

    def mu(m: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(mu_bar(np.asarray(m, dtype=float)), dtype=float) * np.ones(np.shape(m))

    def surface(m: NDArray[np.float64], a: NDArray[np.float64]) -> NDArray[np.float64]:
        m, a = np.broadcast_arrays(np.asarray(m, dtype=float), np.asarray(a, dtype=float))
        return np.asarray(gamma0(m), dtype=float) * np.exp(-age_decay * a)

    return InitialData(mu_bar=mu, gamma_surface=surface, label=label)


def compatible_initial_data(
    coeffs: ModelCoefficients,
    mu_bar: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    age_decay: float = 0.0,
    label: str = "compatible",
) -> InitialData:
    """Anfangsdaten mit Γ(m,0) = β(m,μ̄(m))·μ̄(m) per Konstruktion."""

    def gamma0(m: NDArray[np.float64]) -> NDArray[np.float64]:
        mu = np.asarray(mu_bar(m), dtype=float) * np.ones(np.shape(m))
        return coeffs.beta(m, mu) * mu

    return initial_data_from_functions(mu_bar, gamma0, age_decay=age_decay, label=label)
