"""
Numerische Zeugen der Stabilitäts- und Positivitätsaussagen für berechnete Lösungen.

Das Modul prüft:
    - die Invarianz N = H^a(N) für beliebige stetige Raten a,
    - die Positivität unter der Regulationshypothese,
    - das Stabilitätszertifikat (δ̃, γ̃, κ, L, ρ, c) samt Urteilen,
    - Abklingraten, Einhüllende, stetige Abhängigkeit von den Daten und die Bilanz für P.

Alle Prüfungen lesen nur unveränderliche Felder.
"""

import math
from typing import Callable, Optional

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from numpy.typing import NDArray
from scipy.optimize import brentq

from maturity_sim.config.settings import settings
from maturity_sim.errors import DomainError
from maturity_sim.models.coefficients import InitialData, ModelCoefficients
from maturity_sim.models.reports import (
    BalanceReport,
    ContinuityProbeResult,
    DecayFit,
    EnvelopeReport,
    PositivityReport,
    StabilityCertificate,
)
from maturity_sim.services.commitment_service import CommitmentMaps
from maturity_sim.services.flow_service import SurvivalKernel
from maturity_sim.services.model_service import beta_bound, check_regulation, lipschitz_constant
from maturity_sim.services.solver_service import (
    IntegratedOperator,
    SolutionField,
    build_maturity_grid,
    build_operator,
    initial_branch_F,
    solve,
    source_F,
    source_G,
)
from maturity_sim.utils.grids import refine_maturity_grid, validation_grid

RateLike = float | Callable[[NDArray[np.float64]], NDArray[np.float64]]

SURFACE_AGE_SAMPLES = 33
"""Altersstützstellen je Reifegrad für Suprema über Ω_Θ bzw. Ω_Δ."""


# --------------------------------------------------------------------------- data norms
def _sample_grid(points: Optional[int] = None) -> NDArray[np.float64]:
    return validation_grid(points or settings.validation_grid_points, include_zero=True)


def mu_bar_sup_norm(data: InitialData, points: Optional[int] = None) -> float:
    """‖μ̄‖ auf dem Validierungsgitter."""
    m = _sample_grid(points)
    return float(np.max(np.abs(np.asarray(data.mu_bar(m), dtype=float) * np.ones(m.shape))))


def _surface_samples(data: InitialData, maps: CommitmentMaps, points: Optional[int] = None) -> NDArray[np.float64]:
    m = _sample_grid(points)[:, None]
    ages = maps.tau_theta(m) * np.linspace(0.0, 1.0, SURFACE_AGE_SAMPLES)[None, :]
    mm = np.broadcast_to(m, ages.shape)
    return np.asarray(data.gamma_surface(mm, ages), dtype=float) * np.ones(ages.shape)


def gamma_sup_norm(data: InitialData, maps: CommitmentMaps, points: Optional[int] = None) -> float:
    """‖Γ‖ über Ω_Θ = {(m,a): 0 ≤ a ≤ τ(Θ(m))}."""
    return float(np.max(np.abs(_surface_samples(data, maps, points))))


def gamma_distance(data1: InitialData, data2: InitialData, maps: CommitmentMaps, points: Optional[int] = None) -> float:
    """‖Γ₁ − Γ₂‖ über Ω_Θ."""
    return float(np.max(np.abs(_surface_samples(data1, maps, points) - _surface_samples(data2, maps, points))))


def proliferating_factor_bound(maps: CommitmentMaps, points: int = 401) -> float:
    """C̃ = sup über Ω_Θ von |2(g⁻¹)'(m)·ξ(t, g⁻¹(m))|."""
    m = np.linspace(0.0, 1.0, points)[:, None]
    t = maps.tau_theta(m) * np.linspace(0.0, 1.0, SURFACE_AGE_SAMPLES)[None, :]
    inverse, inverse_prime = maps.g_inverse(np.broadcast_to(m, t.shape))
    return float(np.max(np.abs(2.0 * inverse_prime * maps.proliferating_kernel(t, inverse))))


def initial_source_bound(data: InitialData, maps: CommitmentMaps, points: int = 401) -> float:
    """M̃ = sup über Ω_Δ des Anfangszweigs von F."""
    m = np.linspace(0.0, 1.0, points)[:, None]
    t = maps.tau_delta(m) * np.linspace(0.0, 1.0, SURFACE_AGE_SAMPLES)[None, :]
    return float(np.max(np.abs(initial_branch_F(t, np.broadcast_to(m, t.shape), maps, data))))


def global_data_condition(data: InitialData, coeffs: ModelCoefficients, maps: CommitmentMaps) -> bool:
    """Datenbedingung der globalen Stabilität: ‖Γ‖_{Ω_Θ} ≤ L·‖μ̄‖ (mit globalem L)."""
    lipschitz, _ = lipschitz_constant(coeffs)
    return bool(gamma_sup_norm(data, maps) <= lipschitz * mu_bar_sup_norm(data) * (1.0 + 1e-12))


# ------------------------------------------------------------------------- H^a family
def _rate_function(a: RateLike) -> Callable[[NDArray[np.float64]], NDArray[np.float64]]:
    if callable(a):
        return lambda m: np.asarray(a(np.asarray(m, dtype=float)), dtype=float) * np.ones(np.shape(m))
    value = float(a)
    return lambda m: np.full(np.shape(m), value)


def operator_for(field: SolutionField, data: InitialData, maps: CommitmentMaps) -> IntegratedOperator:
    """Operator auf dem Gitter eines vorhandenen Feldes."""
    return IntegratedOperator(data, maps, field.maturities, field.dt, field.times.size - 1 - field.origin_index)


def apply_Ha(
    field: SolutionField,
    a: RateLike,
    data: InitialData,
    maps: CommitmentMaps,
    operator: Optional[IntegratedOperator] = None,
) -> SolutionField:
    """
    Wendet den Operator H^a auf ein Lösungsfeld an.

    Gegenüber H wird der Integrand um a·N ergänzt und alle Terme mit exp(−∫₀^{t−s} a(χ(−u,m)) du)
    gewichtet. Für eine Lösung N gilt H^a(N) = N für jede stetige Rate a; a ≡ 0 ergibt H.

    Args:
        field (SolutionField): Lösungsfeld mit Historie.
        a: Konstante oder Funktion von m.
        operator (IntegratedOperator | None): Bereits gebauter Operator auf demselben Gitter.
    """
    op = operator or operator_for(field, data, maps)
    rate = _rate_function(a)
    weights = SurvivalKernel(maps.flow, rate, "auxiliary").table(op.dt, op.steps, op.maturities)
    applied = op.apply(field.values, weights=weights, a_chars=rate(op.chars))
    return field.with_values(applied, name=f"H^a({field.name})")


def ha_invariance_defect(
    field: SolutionField,
    a: RateLike,
    data: InitialData,
    maps: CommitmentMaps,
    operator: Optional[IntegratedOperator] = None,
) -> float:
    """sup über t ≥ 0 von |H^a(N) − N|."""
    applied = apply_Ha(field, a, data, maps, operator)
    return float(np.max(np.abs(applied.future_values - field.future_values)))


# ------------------------------------------------------------------------- positivity
def positivity_audit(
    N: SolutionField,
    P: SolutionField,
    data: InitialData,
    maps: CommitmentMaps,
    tolerance: float = -1e-10,
    seed: Optional[int] = None,
) -> PositivityReport:
    """
    Prüft Positivität von N und P sowie die Vorzeichen der Integrandengruppen der Darstellung mit a = β(·,0).

    Die Prüfung ist anwendbar, wenn die Regulationshypothese gilt und μ̄, Γ nichtnegativ sind.
    ``passed`` verlangt min N, min P ≥ ``tolerance`` und, falls anwendbar, nichtnegative Gruppen.
    """
    coeffs = maps.coefficients
    regulation = check_regulation(coeffs, seed=seed)
    m_samples = _sample_grid()
    data_nonnegative = bool(
        np.min(np.asarray(data.mu_bar(m_samples), dtype=float) * np.ones(m_samples.shape)) >= 0.0
        and np.min(_surface_samples(data, maps)) >= 0.0
    )
    applicable = regulation.holds and data_nonnegative

    values = N.future_values
    m = N.maturities[None, :]
    t = N.future_times[:, None]
    loss_group = (coeffs.beta(m, np.zeros_like(values)) - coeffs.beta(m, values)) * values
    delta = maps.delta(m)
    theta = maps.theta(m)
    x_delta = N.eval(np.maximum(t - maps.tau_delta(m), N.times[0]), np.broadcast_to(delta, values.shape))
    x_theta = N.eval(np.maximum(t - maps.tau_theta(m), N.times[0]), np.broadcast_to(theta, values.shape))
    source_group = np.minimum(source_F(t, m, x_delta, maps, data), source_G(t, m, x_theta, maps, data))

    min_n = float(np.min(values))
    min_p = float(np.min(P.future_values))
    min_loss = float(np.min(loss_group))
    min_source = float(np.min(source_group))
    passed = min_n >= tolerance and min_p >= tolerance
    if applicable:
        passed = passed and min_loss >= tolerance and min_source >= tolerance
    else:
        logger.warning("Positivitätsprüfung nicht anwendbar: Regulationshypothese oder Datenvorzeichen verletzt")
    logger.info(f"Positivität: min N={min_n:.3e}, min P={min_p:.3e}, bestanden={passed}")
    return PositivityReport(
        applicable=applicable,
        regulation=regulation,
        min_N=min_n,
        min_P=min_p,
        min_loss_group=min_loss,
        min_source_group=min_source,
        tolerance=tolerance,
        passed=passed,
        data_nonnegative=data_nonnegative,
    )


# ------------------------------------------------------------------------ certificate
def rho_inequality(rho: float, delta_tilde: float, lipschitz: float, zeta_norm: float, tau_max: float) -> float:
    """δ̃ − ρ − L(1 + ‖ζ‖e^{ρτ_max}); zulässige ρ sind die mit positivem Wert."""
    return delta_tilde - rho - lipschitz * (1.0 + zeta_norm * math.exp(rho * tau_max))


def feasible_rho_bound(delta_tilde: float, lipschitz: float, zeta_norm: float, tau_max: float) -> Optional[float]:
    """
    Supremum der zulässigen Abklingraten in (0, δ̃), oder ``None`` wenn die Menge leer ist.

    Die Ungleichung ist streng fallend in ρ; die Grenze ist ihre Nullstelle.
    """
    if delta_tilde <= 0.0 or rho_inequality(0.0, delta_tilde, lipschitz, zeta_norm, tau_max) <= 0.0:
        return None
    if rho_inequality(delta_tilde, delta_tilde, lipschitz, zeta_norm, tau_max) >= 0.0:
        return delta_tilde
    return float(
        brentq(
            rho_inequality,
            0.0,
            delta_tilde,
            args=(delta_tilde, lipschitz, zeta_norm, tau_max),
            xtol=settings.bisection_xtol,
            maxiter=settings.bisection_max_iterations * 4,
        )
    )


def stability_certificate(
    coeffs: ModelCoefficients,
    maps: CommitmentMaps,
    eps_neighborhood: float = 0.01,
    data: Optional[InitialData] = None,
    grid_resolution: Optional[int] = None,
) -> StabilityCertificate:
    """
    Berechnet die Konstanten der lokalen und globalen Stabilitätsaussagen.

    δ̃ = inf(δ+V'), γ̃ = inf(γ+V') auf dem Validierungsgitter, κ = sup|(g⁻¹)'|, L aus
    :func:`lipschitz_constant` im ε-Ball. ρ ist die Mitte des zulässigen Intervalls (0, ρ_sup),
    c = (δ̃−ρ)ε / (δ̃−ρ−L(1+‖ζ‖e^{ρτ_max})).

    Args:
        coeffs (ModelCoefficients): Koeffizienten.
        maps (CommitmentMaps): Tabellierte Abbildungen (liefern κ, ‖ζ‖, τ_max).
        eps_neighborhood (float): Radius ε der Nachbarschaft.
        data (InitialData | None): Wenn gesetzt, wird die Datenbedingung der globalen Aussage geprüft.
    """
    grid = _sample_grid(grid_resolution)
    slope = coeffs.velocity.derivative(grid)
    delta_tilde = float(np.min(coeffs.resting_loss(grid) + slope))
    gamma_tilde = float(np.min(coeffs.apoptosis(grid) + slope))
    kappa = maps.kappa
    lipschitz, kind = lipschitz_constant(coeffs, radius=eps_neighborhood, grid_resolution=grid_resolution)
    zeta_norm = maps.zeta_norm
    load = lipschitz * (1.0 + 2.0 * kappa)
    margin_local = delta_tilde - load
    margin_corollary = min(gamma_tilde, delta_tilde) - load

    rho_sup = feasible_rho_bound(delta_tilde, lipschitz, zeta_norm, maps.tau_max)
    rho = c = None
    if rho_sup is not None:
        rho = 0.5 * rho_sup
        c = (delta_tilde - rho) * eps_neighborhood / rho_inequality(rho, delta_tilde, lipschitz, zeta_norm, maps.tau_max)

    verdict_local = margin_local > 0.0
    verdict_corollary = margin_corollary > 0.0
    certificate = StabilityCertificate(
        delta_tilde=delta_tilde,
        gamma_tilde=gamma_tilde,
        kappa=kappa,
        lipschitz_L=lipschitz,
        lipschitz_kind=kind,
        zeta_norm=zeta_norm,
        tau_max=maps.tau_max,
        eps_neighborhood=eps_neighborhood,
        margin_local=margin_local,
        margin_corollary=margin_corollary,
        rho_sup=rho_sup,
        rho=rho,
        c=c,
        verdict_local=verdict_local,
        verdict_corollary=verdict_corollary,
        verdict_global=verdict_corollary and kind == "hill",
        global_data_condition=global_data_condition(data, coeffs, maps) if data is not None else None,
    )
    if verdict_local:
        logger.info(f"Lokale Stabilität bestätigt: Reserve {margin_local:.6g}, ρ={rho}, c={c}")
    else:
        logger.warning(f"Stabilitätsbedingung verletzt: L(1+2κ)={load:.6g} ≥ δ̃={delta_tilde:.6g}")
    return certificate


# ----------------------------------------------------------------------------- decay
def _log_linear_fit(times: NDArray[np.float64], sups: NDArray[np.float64]) -> tuple[float, float, float]:
    positive = sups > 0.0
    if np.count_nonzero(positive) < 2:
        return math.inf, 0.0, 0.0
    x, y = times[positive], np.log(sups[positive])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(-slope), float(math.exp(intercept)), residual


def envelope_check(name: str, sups: NDArray[np.float64], bound: NDArray[np.float64], rel_tol: float = 1e-9) -> EnvelopeReport:
    """Zählt Zeitknoten mit sup_m|N| > Schranke·(1+rel_tol)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(bound > 0.0, sups / bound, np.where(sups > 0.0, np.inf, 0.0))
    violations = int(np.count_nonzero(sups > bound * (1.0 + rel_tol)))
    max_ratio = float(np.max(ratios)) if ratios.size else 0.0
    if violations:
        logger.warning(f"Einhüllende '{name}' an {violations} Zeitknoten verletzt (max. Verhältnis {max_ratio:.6g})")
    return EnvelopeReport(name=name, violations=violations, max_ratio=max_ratio, passed=violations == 0)


def decay_rate_estimate(
    field: SolutionField,
    t_start: Optional[float] = None,
    certificate: Optional[StabilityCertificate] = None,
) -> DecayFit:
    """
    Kleinste-Quadrate-Anpassung von log sup_m|N(t,m)| = log ĉ − d(t − t_start) auf [t_start, T].

    Der Knoten m = 0 wird ausgeschlossen; der Wert mit m = 0 steht in ``rate_including_origin``.
    Mit einem Zertifikat, dessen lokale Bedingung gilt, wird zusätzlich
    sup_m|N| ≤ c·e^{−ρ(t−τ_max)} für t ≥ τ_max geprüft.

    Raises:
        DomainError: Wenn das Feld weniger als zwei Zeitknoten ab ``t_start`` enthält.
    """
    if t_start is None:
        t_start = certificate.tau_max if certificate is not None else float(-field.times[0])
    times = field.future_times
    window = times >= t_start - 1e-12
    if np.count_nonzero(window) < 2:
        raise DomainError("Für die Abklinganpassung fehlen Zeitknoten", t_start=t_start, horizon=field.horizon)
    shifted = times[window] - t_start
    rate, prefactor, residual = _log_linear_fit(shifted, field.sup_norms(exclude_origin=True)[window])
    rate_all, _, _ = _log_linear_fit(shifted, field.sup_norms()[window])
    infinite = math.isinf(rate)
    if infinite:
        logger.info("Feld ab t_start identisch null: unendliche Abklingrate")

    envelope: Optional[EnvelopeReport] = None
    if certificate is not None and certificate.verdict_local and certificate.rho is not None and certificate.c is not None:
        tail = times >= certificate.tau_max - 1e-12
        bound = certificate.c * np.exp(-certificate.rho * (times[tail] - certificate.tau_max))
        envelope = envelope_check("decay", field.sup_norms()[tail], bound)

    return DecayFit(
        rate=rate,
        prefactor=prefactor,
        fit_residual=residual,
        t_start=t_start,
        samples=int(np.count_nonzero(window)),
        rate_including_origin=rate_all,
        infinite=infinite,
        envelope_checked=envelope is not None,
        envelope_violations=envelope.violations if envelope else 0,
        envelope_max_ratio=envelope.max_ratio if envelope else None,
    )


# ------------------------------------------------------------------------ continuity
def continuity_probe(
    data1: InitialData,
    data2: InitialData,
    maps: CommitmentMaps,
    horizon: float,
    threads: Optional[int] = None,
    dt: Optional[float] = None,
    maturities: Optional[NDArray[np.float64]] = None,
) -> ContinuityProbeResult:
    """
    Löst für zwei Datensätze (parallel) und vergleicht die Abweichung mit der Gronwall-Konstante.

    C(t) = K̃·max{1,C̃}·e^{L(R)K̃(1+‖ζ‖)t} mit R = 1 + sup‖N₁‖; geprüft wird
    ‖N₁(t)−N₂(t)‖ ≤ C(t)·(‖μ̄₁−μ̄₂‖ + ‖Γ₁−Γ₂‖_{Ω_Θ}).
    """
    with Parallel(n_jobs=threads or settings.threads, prefer="threads") as parallel:
        first, second = parallel(
            delayed(solve)(data, maps, horizon, dt=dt, maturities=maturities) for data in (data1, data2)
        )
    n1, n2 = first.N, second.N
    deviation = np.max(np.abs(n1.future_values - n2.future_values), axis=1)
    distance = float(np.max(np.abs(data1.mu_bar(_sample_grid()) - data2.mu_bar(_sample_grid())))) + gamma_distance(
        data1, data2, maps
    )
    ratio = deviation / distance if distance > 0.0 else np.zeros_like(deviation)

    times = n1.future_times
    radius = 1.0 + float(np.max(n1.sup_norms()))
    lipschitz, _ = lipschitz_constant(maps.coefficients, radius=radius)
    k_tilde = first.diagnostics.k_tilde
    constant = (
        k_tilde
        * max(1.0, proliferating_factor_bound(maps))
        * np.exp(lipschitz * k_tilde * (1.0 + maps.zeta_norm) * times)
    )
    bound_holds = bool(np.all(deviation <= constant * distance * (1.0 + 1e-9) + 1e-15))
    logger.info(f"Stetige Abhängigkeit: max. Abweichung {np.max(deviation):.3e}, Schranke eingehalten={bound_holds}")
    return ContinuityProbeResult(
        times=times.tolist(),
        deviation=deviation.tolist(),
        data_distance=distance,
        ratio=ratio.tolist(),
        gronwall_constant=constant.tolist(),
        bound_holds=bound_holds,
    )


# ------------------------------------------------------------- invariance and growth
def invariance_sequence(
    data: InitialData,
    maps: CommitmentMaps,
    iterations: int,
    horizon: float,
    dt: Optional[float] = None,
    maturities: Optional[NDArray[np.float64]] = None,
    operator: Optional[IntegratedOperator] = None,
) -> list[float]:
    """
    sup-Normen der Folge N₀ = K·μ̄(χ), N_{k+1} = H(N_k) auf [0, horizon].

    Unter den Voraussetzungen der Invarianzaussage bleibt jedes Glied im ε-Ball.
    """
    op = operator or build_operator(data, maps, horizon, dt=dt, maturities=maturities)
    values = op.initial_values()
    values[op.origin_index :] = op.kernel_term
    norms = [float(np.max(np.abs(values[op.origin_index :])))]
    for _ in range(iterations):
        values = op.apply(values)
        norms.append(float(np.max(np.abs(values[op.origin_index :]))))
    logger.debug(f"Invarianzfolge: {norms}")
    return norms


def invariance_check(field: SolutionField, eps: float, rel_tol: float = 1e-6) -> EnvelopeReport:
    """sup_t ‖N(t,·)‖ ≤ ε·(1+rel_tol)."""
    sups = field.sup_norms()
    return envelope_check("invariance", sups, np.full(sups.shape, eps), rel_tol=rel_tol)


def invariance_radius(data: InitialData, maps: CommitmentMaps, lipschitz: float) -> float:
    """Kleinstes ε mit ‖μ̄‖ ≤ ε und ‖Γ‖_{Ω_Θ} ≤ εL."""
    eps = mu_bar_sup_norm(data)
    if lipschitz > 0.0:
        eps = max(eps, gamma_sup_norm(data, maps) / lipschitz)
    return eps


def growth_envelope(
    data: InitialData,
    maps: CommitmentMaps,
    times: NDArray[np.float64],
    k_tilde: float,
    beta_tilde: Optional[float] = None,
) -> NDArray[np.float64]:
    """K̃(‖μ̄‖ + M̃t)·e^{K̃β̃(‖ζ‖+1)t} für beschränktes β."""
    if beta_tilde is None:
        beta_tilde = beta_bound(maps.coefficients)
    m_tilde = initial_source_bound(data, maps)
    t = np.asarray(times, dtype=float)
    return k_tilde * (mu_bar_sup_norm(data) + m_tilde * t) * np.exp(k_tilde * beta_tilde * (maps.zeta_norm + 1.0) * t)


def growth_check(field: SolutionField, data: InitialData, maps: CommitmentMaps, k_tilde: float) -> EnvelopeReport:
    bound = growth_envelope(data, maps, field.future_times, k_tilde)
    return envelope_check("growth", field.sup_norms(), bound)


# --------------------------------------------------------------------------- balance
def proliferating_balance(
    N: SolutionField, P: SolutionField, data: InitialData, maps: CommitmentMaps
) -> BalanceReport:
    """
    Vergleicht d/dt ∫P dm mit −∫γP + ∫β(m,N)N − ∫G − V(1)P(t,1) an inneren Zeitknoten.

    Die Zeitableitung ist ein zentraler Differenzenquotient, die m-Integrale sind Trapezsummen.
    """
    coeffs = maps.coefficients
    m = P.maturities
    t = P.times
    if t.size < 3:
        raise DomainError("Die Bilanz braucht mindestens drei Zeitknoten", samples=int(t.size))
    mm = m[None, :]
    tt = t[:, None]
    n_values = N.future_values
    theta = np.broadcast_to(maps.theta(mm), n_values.shape)
    delayed_n = N.eval(np.maximum(tt - maps.tau_theta(mm), N.times[0]), theta)
    gain = coeffs.beta(mm, n_values) * n_values
    loss = coeffs.apoptosis(mm) * P.values
    exit_g = source_G(tt, mm, delayed_n, maps, data)
    outflow = float(coeffs.velocity(np.array(1.0))) * P.values[:, -1]

    total = np.trapezoid(P.values, m, axis=1)
    derivative = (total[2:] - total[:-2]) / (t[2:] - t[:-2])
    rhs = (np.trapezoid(gain - loss - exit_g, m, axis=1) - outflow)[1:-1]
    scale = (
        np.trapezoid(np.abs(gain) + np.abs(loss) + np.abs(exit_g), m, axis=1) + np.abs(outflow)
    )[1:-1]
    defect = np.abs(derivative - rhs)
    max_scale = float(np.max(scale))
    max_defect = float(np.max(defect))
    return BalanceReport(
        max_defect=max_defect,
        max_scale=max_scale,
        relative_defect=max_defect / max_scale if max_scale > 0.0 else 0.0,
    )


# -------------------------------------------------------------------------- residual
def refined_residual(field: SolutionField, data: InitialData, maps: CommitmentMaps, refine: int = 2) -> float:
    """
    Unabhängiges Residuum: das bilinear interpolierte Feld wird auf einem um ``refine`` verfeinerten
    Gitter in t und m mit dem Operator verglichen; gemessen an den groben Zeitknoten.
    """
    nodes, smallest = refine_maturity_grid(field.maturities.size, float(field.maturities[1]), refine)
    fine_m = build_maturity_grid(nodes, smallest, maps.g_one)
    coarse_steps = field.times.size - 1 - field.origin_index
    op = IntegratedOperator(data, maps, fine_m, field.dt / refine, coarse_steps * refine)
    tt, mm = np.meshgrid(np.clip(op.times, field.times[0], field.times[-1]), fine_m, indexing="ij")
    values = field.eval(tt, mm)
    values[: op.origin_index + 1] = op.mu_bar_nodes
    applied = op.apply(values)
    rows = op.origin_index + refine * np.arange(coarse_steps + 1)
    residual = float(np.max(np.abs(applied[rows] - values[rows])))
    logger.debug(f"Verfeinertes Residuum (Faktor {refine}): {residual:.3e}")
    return residual
