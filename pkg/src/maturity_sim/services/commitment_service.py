"""
Festlegungsreifegrad Θ, Mutter-Tochter-Abbildung Δ, geklemmte Inverse g⁻¹ und die Faktoren π, ζ.

Der Builder berechnet Θ punktweise per Bisektion; :meth:`CommitmentMapsBuilder.build_factors` tabelliert
alle Abbildungen auf einem Reifegradgitter und liefert unveränderliche :class:`CommitmentMaps`, die der
Löser an beliebigen Punkten interpoliert (Θ, Δ, ζ monoton kubisch, π linear).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import PchipInterpolator

from maturity_sim.config.settings import settings
from maturity_sim.errors import BracketError, CoefficientError
from maturity_sim.models.coefficients import ModelCoefficients
from maturity_sim.models.functions import AffineFunction
from maturity_sim.services.flow_service import CharacteristicFlow, SurvivalKernel
from maturity_sim.utils.grids import graded_maturity_grid

DENSE_INVERSE_POINTS = 4001
"""Stützstellen für die Inversion nichtlinearer Teilungsabbildungen."""


def bisect_decreasing(
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    lo: NDArray[np.float64],
    hi: NDArray[np.float64],
    xtol: NDArray[np.float64],
    max_iterations: int,
) -> tuple[NDArray[np.float64], int]:
    """
    Vektorisierte Bisektion für elementweise streng fallende Funktionen mit func(lo) > 0 > func(hi).

    Returns:
        tuple: (Nullstellen, benötigte Iterationen)
    """
    lo, hi = lo.copy(), hi.copy()
    iterations = 0
    while iterations < max_iterations and np.any(hi - lo > xtol):
        mid = 0.5 * (lo + hi)
        positive = func(mid) > 0.0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
        iterations += 1
    return 0.5 * (lo + hi), iterations


class InverseDivisionMap:
    """
    Geklemmte Inverse der Teilungsabbildung: g⁻¹(m) = 1 und (g⁻¹)'(m) = 0 für m > g(1).

    Lineare Abbildungen g(m) = s·m werden exakt invertiert, sonst über eine monotone Interpolation
    der Umkehrtabelle mit Newton-Nachkorrektur; die Ableitung folgt der Umkehrregel 1/g'(g⁻¹(m)).
    """

    def __init__(self, division_map) -> None:
        self.division_map = division_map
        self.g_one = float(division_map(1.0))
        self._slope: Optional[float] = None
        if isinstance(division_map, AffineFunction) and division_map.intercept == 0.0 and division_map.slope > 0.0:
            self._slope = division_map.slope
            return
        xs = np.linspace(0.0, 1.0, DENSE_INVERSE_POINTS)
        gs = division_map(xs)
        if np.any(np.diff(gs) <= 0.0):
            raise CoefficientError("Die Teilungsabbildung g ist nicht streng wachsend")
        self._g_zero = float(gs[0])
        self._inverse = PchipInterpolator(gs, xs)

    def __call__(self, m: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        m = np.asarray(m, dtype=float)
        inside = m <= self.g_one
        if self._slope is not None:
            value = m / self._slope
            prime = np.full(m.shape, 1.0 / self._slope)
        else:
            clipped = np.clip(m, self._g_zero, self.g_one)
            value = np.asarray(self._inverse(clipped), dtype=float)
            for _ in range(2):
                slope = self.division_map.derivative(value)
                step = np.where(slope > 0.0, (self.division_map(value) - clipped) / np.where(slope > 0.0, slope, 1.0), 0.0)
                value = np.clip(value - step, 0.0, 1.0)
            slope = self.division_map.derivative(value)
            prime = np.where(slope > 0.0, 1.0 / np.where(slope > 0.0, slope, 1.0), 0.0)
        return np.where(inside, value, 1.0), np.where(inside, prime, 0.0)


@dataclass(frozen=True, eq=False)
class CommitmentMaps:
    """
    Tabellierte Abbildungen Θ, Δ, g⁻¹, π, ζ mit Interpolation zwischen den Knoten.

    Θ(0) = 0 per Stetigkeit. ζ ist bei m = g(1) im Allgemeinen unstetig und wird stückweise
    interpoliert; rechts von g(1) gilt ζ = 0 und Δ = Θ(1).
    """

    nodes: NDArray[np.float64]
    theta_table: NDArray[np.float64]
    delta_table: NDArray[np.float64]
    g_inverse_table: NDArray[np.float64]
    g_inverse_prime_table: NDArray[np.float64]
    pi_table: NDArray[np.float64]
    zeta_table: NDArray[np.float64]
    xi_theta_table: NDArray[np.float64]
    tau_max: float
    tau_delta_min: float
    kappa: float
    g_one: float
    coefficients: ModelCoefficients
    flow: CharacteristicFlow
    proliferating_kernel: SurvivalKernel
    inverse_map: InverseDivisionMap
    _theta: PchipInterpolator = field(init=False, repr=False)
    _delta_left: PchipInterpolator = field(init=False, repr=False)
    _zeta_left: PchipInterpolator = field(init=False, repr=False)
    _xi_theta: PchipInterpolator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        left = self.nodes <= self.g_one
        object.__setattr__(self, "_theta", PchipInterpolator(self.nodes, self.theta_table))
        object.__setattr__(self, "_delta_left", PchipInterpolator(self.nodes[left], self.delta_table[left]))
        object.__setattr__(self, "_zeta_left", PchipInterpolator(self.nodes[left], self.zeta_table[left]))
        object.__setattr__(self, "_xi_theta", PchipInterpolator(self.nodes, self.xi_theta_table))

    @property
    def zeta_norm(self) -> float:
        return float(np.max(np.abs(self.zeta_table)))

    @property
    def theta_one(self) -> float:
        return float(self.theta_table[-1])

    def theta(self, m: ArrayLike) -> NDArray[np.float64]:
        return np.asarray(self._theta(np.asarray(m, dtype=float)), dtype=float)

    def delta(self, m: ArrayLike) -> NDArray[np.float64]:
        m = np.asarray(m, dtype=float)
        inside = m <= self.g_one
        left = np.asarray(self._delta_left(np.minimum(m, self.g_one)), dtype=float)
        return np.where(inside, left, self.theta_one)

    def zeta(self, m: ArrayLike) -> NDArray[np.float64]:
        m = np.asarray(m, dtype=float)
        inside = m <= self.g_one
        left = np.asarray(self._zeta_left(np.minimum(m, self.g_one)), dtype=float)
        return np.where(inside, left, 0.0)

    def pi(self, m: ArrayLike) -> NDArray[np.float64]:
        return np.interp(np.asarray(m, dtype=float), self.nodes, self.pi_table)

    def xi_theta(self, m: ArrayLike) -> NDArray[np.float64]:
        """ξ(τ(Θ(m)), m): Überleben in der proliferierenden Phase von der Festlegung bis zur Teilung."""
        return np.asarray(self._xi_theta(np.asarray(m, dtype=float)), dtype=float)

    def g_inverse(self, m: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return self.inverse_map(m)

    def tau_delta(self, m: ArrayLike) -> NDArray[np.float64]:
        return self.coefficients.division_age(self.delta(m))

    def tau_theta(self, m: ArrayLike) -> NDArray[np.float64]:
        return self.coefficients.division_age(self.theta(m))

    def to_columns(self) -> dict[str, NDArray[np.float64]]:
        """Spalten für den CSV-Export der Tabellen."""
        return {
            "m": self.nodes,
            "theta": self.theta_table,
            "delta": self.delta_table,
            "g_inverse": self.g_inverse_table,
            "g_inverse_prime": self.g_inverse_prime_table,
            "pi": self.pi_table,
            "zeta": self.zeta_table,
        }


class CommitmentMapsBuilder:
    """
    Berechnet Θ(m) als Nullstelle von x ↦ T(x,m) − τ(x) auf (0,m), mit T der Flugzeit.

    Die Funktion ist streng fallend, positiv nahe 0 (Divergenz der Flugzeit) und negativ bei x = m.
    Der Builder ist für einen Aufbau gedacht; das Ergebnis von :meth:`build_factors` ist unveränderlich.
    """

    def __init__(
        self,
        coeffs: ModelCoefficients,
        flow: CharacteristicFlow,
        proliferating_kernel: SurvivalKernel,
        xtol: Optional[float] = None,
        max_iterations: Optional[int] = None,
    ) -> None:
        self.coefficients = coeffs
        self.flow = flow
        self.proliferating_kernel = proliferating_kernel
        self.xtol = xtol or settings.bisection_xtol
        self.max_iterations = max_iterations or settings.bisection_max_iterations
        self.inverse_map = InverseDivisionMap(coeffs.division_map)

    def _residual(self, x: NDArray[np.float64], m: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.flow.time_of_flight(x, m) - self.coefficients.division_age(x)

    def theta(self, m: ArrayLike) -> NDArray[np.float64]:
        """
        Festlegungsreifegrad Θ(m); Θ(0) = 0.

        Raises:
            BracketError: Wenn kein x ∈ (0,m) mit positivem Residuum gefunden wird.
            CoefficientError: Wenn τ(m) ≤ 0 (dann ist x = m keine obere Schranke).
        """
        m_arr = np.atleast_1d(np.asarray(m, dtype=float))
        result = np.zeros(m_arr.shape)
        positive = m_arr > 0.0
        if not np.any(positive):
            return result.reshape(np.shape(m))
        target = m_arr[positive]
        if np.any(self.coefficients.division_age(target) <= 0.0):
            raise CoefficientError("τ muss positiv sein, um Θ einzuschließen")

        lo = 0.5 * target
        unbracketed = self._residual(lo, target) <= 0.0
        halvings = 0
        while np.any(unbracketed):
            lo = np.where(unbracketed, 0.5 * lo, lo)
            halvings += 1
            if halvings > 1100 or np.any(lo[unbracketed] == 0.0):
                worst = float(target[unbracketed][0])
                raise BracketError("Θ lässt sich nicht einschließen (Teilungsalter-Bedingung verletzt?)", m=worst)
            unbracketed = self._residual(lo, target) <= 0.0

        roots, iterations = bisect_decreasing(
            lambda x: self._residual(x, target), lo, target.copy(), self.xtol * target, self.max_iterations
        )
        if iterations >= self.max_iterations:
            logger.debug(f"Bisektion für Θ nach {iterations} Iterationen beendet")
        result[positive] = roots
        return result.reshape(np.shape(m))

    def g_inverse(self, m: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return self.inverse_map(m)

    def delta_map(self, m: ArrayLike) -> NDArray[np.float64]:
        inverse, _ = self.inverse_map(m)
        return self.theta(inverse)

    def build_factors(self, grid: ArrayLike) -> CommitmentMaps:
        """
        Tabelliert Θ, Δ, g⁻¹, π, ζ auf dem Gitter (ergänzt um g(1)) und bestimmt τ_max, τ_Δ und κ.

        Raises:
            CoefficientError: Wenn τ_Δ ≤ 0.
        """
        coeffs = self.coefficients
        nodes = np.asarray(grid, dtype=float)
        g_one = self.inverse_map.g_one
        if 0.0 < g_one < 1.0:
            nodes = np.union1d(nodes, [g_one])
        theta_table = self.theta(nodes)
        g_inv, g_inv_prime = self.inverse_map(nodes)
        delta_table = self.theta(g_inv)
        tau = coeffs.division_age
        tau_delta = tau(delta_table)
        zeta_table = 2.0 * g_inv_prime * self.proliferating_kernel(tau_delta, g_inv)
        pi_table = 1.0 / (1.0 + coeffs.velocity(theta_table) * tau.derivative(theta_table))
        xi_theta_table = self.proliferating_kernel(tau(theta_table), nodes)

        dense = np.linspace(0.0, 1.0, settings.validation_grid_points + 1)
        tau_max = float(max(np.max(tau(dense)), np.max(tau(nodes))))
        tau_delta_min = float(np.min(tau_delta))
        if tau_delta_min <= 0.0:
            raise CoefficientError("τ_Δ = min τ(Δ(m)) muss positiv sein", tau_delta_min=tau_delta_min)
        kappa = float(np.max(np.abs(g_inv_prime)))
        logger.info(
            f"Festlegungsabbildungen tabelliert: {nodes.size} Knoten, τ_max={tau_max:.6g}, "
            f"τ_Δ={tau_delta_min:.6g}, κ={kappa:.6g}, ‖ζ‖={np.max(np.abs(zeta_table)):.6g}"
        )
        return CommitmentMaps(
            nodes=nodes,
            theta_table=theta_table,
            delta_table=delta_table,
            g_inverse_table=g_inv,
            g_inverse_prime_table=g_inv_prime,
            pi_table=pi_table,
            zeta_table=zeta_table,
            xi_theta_table=xi_theta_table,
            tau_max=tau_max,
            tau_delta_min=tau_delta_min,
            kappa=kappa,
            g_one=g_one,
            coefficients=coeffs,
            flow=self.flow,
            proliferating_kernel=self.proliferating_kernel,
            inverse_map=self.inverse_map,
        )


def theta(builder: CommitmentMapsBuilder, m: ArrayLike) -> NDArray[np.float64]:
    return builder.theta(m)


def g_inverse(builder: CommitmentMapsBuilder, m: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    return builder.g_inverse(m)


def delta_map(builder: CommitmentMapsBuilder, m: ArrayLike) -> NDArray[np.float64]:
    return builder.delta_map(m)


def build_factors(builder: CommitmentMapsBuilder, grid: ArrayLike) -> CommitmentMaps:
    return builder.build_factors(grid)


def build_commitment_maps(coeffs: ModelCoefficients, grid: Optional[ArrayLike] = None) -> CommitmentMaps:
    """Fluss, Kern ξ und Tabellen in einem Schritt; Default ist das verdichtete Standardgitter."""
    flow = CharacteristicFlow(coeffs.velocity)
    kernel = SurvivalKernel(flow, coeffs.apoptosis, "proliferating")
    if grid is None:
        grid = graded_maturity_grid(settings.maturity_nodes, settings.smallest_cell)
    return CommitmentMapsBuilder(coeffs, flow, kernel).build_factors(grid)
