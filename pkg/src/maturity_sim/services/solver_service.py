"""
Löser der integrierten Formulierung für die ruhende Dichte N(t,m) und die proliferierende Dichte P(t,m).

N wird als Fixpunkt des Operators H durch fensterweise Picard-Iteration bestimmt; P folgt danach durch
direkte Quadratur. Alle Integrale in s verwenden die Trapezregel auf dem gemeinsamen Zeitgitter, die
Integranden werden entlang der exakten Charakteristik χ(−(t−s),m) ausgewertet, nur N wird in m
interpoliert. An den Nahtstellen s = τ(Δ(·)) bzw. s = τ(Θ(·)) werden die Panels geteilt.

Beispiel:
    >>> result = solve(data, maps, horizon=5.0)
    >>> N, P = result
    >>> eval_field(N, 1.0, 0.5).item()
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Literal, Optional

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import PchipInterpolator, RegularGridInterpolator

from maturity_sim.config.settings import settings
from maturity_sim.errors import ConvergenceError, FieldRangeError, NonFiniteError, WindowCollapseError
from maturity_sim.models.coefficients import InitialData
from maturity_sim.models.reports import SolveDiagnostics, WindowRecord
from maturity_sim.services.commitment_service import CommitmentMaps
from maturity_sim.services.flow_service import SurvivalKernel
from maturity_sim.services.model_service import lipschitz_constant
from maturity_sim.utils.grids import (
    graded_maturity_grid,
    interpolation_weights,
    steps_for_horizon,
    trapezoid_weights,
)

GAMMA_BAR_NODES = 32
"""Gauss-Legendre-Knoten für Γ̄(m) = ∫₀^{τ(Θ(m))} Γ(m,a) da."""

Branch = Literal["F", "G"]


@dataclass(frozen=True, eq=False)
class SolutionField:
    """
    Gitterfeld mit Historie: Zeilen t_i = (i − origin_index)·dt, Spalten Reifegradknoten.

    Für N beginnt das Gitter bei −⌈τ_max/dt⌉·dt ≤ −τ_max und die Historienzeilen sind μ̄;
    für P beginnt es bei t = 0. Auswertung zwischen Knoten bilinear.
    """

    times: NDArray[np.float64]
    maturities: NDArray[np.float64]
    values: NDArray[np.float64]
    origin_index: int
    name: str = "N"
    _interpolator: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.values.shape != (self.times.size, self.maturities.size):
            raise ValueError(f"Feldform {self.values.shape} passt nicht zum Gitter")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteError(f"Feld {self.name} enthält nicht-endliche Werte")
        object.__setattr__(
            self, "_interpolator", RegularGridInterpolator((self.times, self.maturities), self.values, method="linear")
        )

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def future_times(self) -> NDArray[np.float64]:
        return self.times[self.origin_index :]

    @property
    def future_values(self) -> NDArray[np.float64]:
        return self.values[self.origin_index :]

    def eval(self, t: ArrayLike, m: ArrayLike) -> NDArray[np.float64]:
        """
        Bilineare Auswertung; an Knoten exakt.

        Raises:
            FieldRangeError: Für (t,m) außerhalb des Gitters.
        """
        t_arr, m_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(m, dtype=float))
        slack = 1e-12 * max(1.0, abs(self.horizon))
        if np.any(t_arr < self.times[0] - slack) or np.any(t_arr > self.times[-1] + slack):
            raise FieldRangeError(
                f"Zeit außerhalb von [{self.times[0]:g}, {self.times[-1]:g}]", field=self.name, t_min=float(np.min(t_arr))
            )
        if np.any(m_arr < -1e-12) or np.any(m_arr > 1.0 + 1e-12):
            raise FieldRangeError("Reifegrad außerhalb von [0,1]", field=self.name)
        points = np.stack([np.clip(t_arr, self.times[0], self.times[-1]), np.clip(m_arr, 0.0, 1.0)], axis=-1)
        return np.asarray(self._interpolator(points), dtype=float)

    def sup_norms(self, exclude_origin: bool = False) -> NDArray[np.float64]:
        """sup_m |N(t_i,m)| für alle t_i ≥ 0; optional ohne den Knoten m = 0."""
        rows = self.future_values
        if exclude_origin:
            rows = rows[:, self.maturities > 0.0]
        return np.max(np.abs(rows), axis=1)

    def with_values(self, values: NDArray[np.float64], name: Optional[str] = None) -> "SolutionField":
        return SolutionField(self.times, self.maturities, values, self.origin_index, name or self.name)


@dataclass(frozen=True)
class PicardWindow:
    """Fenster der Picard-Iteration über die Zeitschritte ``start_index`` bis ``stop_index`` (inklusive)."""

    start_index: int
    stop_index: int
    dt: float
    contraction_estimate: float
    radius: float
    max_iterations: int
    tolerance: float

    @property
    def steps(self) -> int:
        return self.stop_index - self.start_index + 1

    @property
    def length(self) -> float:
        return self.steps * self.dt


@dataclass
class SolveResult:
    """Ergebnis von :func:`solve`; entpackt sich wie ``N, P = result``."""

    N: SolutionField
    P: SolutionField
    diagnostics: SolveDiagnostics
    operator: "IntegratedOperator"

    def __iter__(self) -> Iterator[SolutionField]:
        return iter((self.N, self.P))


@dataclass(frozen=True, eq=False)
class _BranchTables:
    kind: Branch
    target: NDArray[np.float64]
    delay: NDArray[np.float64]
    factor: NDArray[np.float64]
    target_idx: NDArray[np.intp]
    target_w: NDArray[np.float64]
    initial: NDArray[np.float64]
    initial_rows: int


def gamma_bar_values(data: InitialData, maps: CommitmentMaps, m: ArrayLike) -> NDArray[np.float64]:
    """Γ̄(m), aus den Daten oder per Gauss-Legendre-Quadratur über [0, τ(Θ(m))]."""
    m = np.asarray(m, dtype=float)
    if data.gamma_bar is not None:
        return np.asarray(data.gamma_bar(m), dtype=float) * np.ones(m.shape)
    nodes, weights = leggauss(GAMMA_BAR_NODES)
    upper = maps.tau_theta(m)[..., None]
    ages = 0.5 * upper * (nodes + 1.0)
    values = np.asarray(data.gamma_surface(np.broadcast_to(m[..., None], ages.shape), ages), dtype=float)
    return 0.5 * upper[..., 0] * np.sum(values * weights, axis=-1)


def initial_branch_F(s: ArrayLike, m: ArrayLike, maps: CommitmentMaps, data: InitialData) -> NDArray[np.float64]:
    """Quellterm F auf Ω_Δ: 2(g⁻¹)'(m)·ξ(s,g⁻¹(m))·Γ(χ(−s,g⁻¹(m)), τ(Δ(m))−s); Alter unten bei 0 begrenzt."""
    s_arr, m_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(m, dtype=float))
    inverse, inverse_prime = maps.g_inverse(m_arr)
    age = np.maximum(maps.tau_delta(m_arr) - s_arr, 0.0)
    mother = maps.flow.chi(-s_arr, inverse)
    return 2.0 * inverse_prime * maps.proliferating_kernel(s_arr, inverse) * data.gamma_surface(mother, age)


def initial_branch_G(s: ArrayLike, m: ArrayLike, maps: CommitmentMaps, data: InitialData) -> NDArray[np.float64]:
    """Quellterm G auf Ω_Θ: π(m)·ξ(s,m)·Γ(χ(−s,m), τ(Θ(m))−s); Alter unten bei 0 begrenzt."""
    s_arr, m_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(m, dtype=float))
    age = np.maximum(maps.tau_theta(m_arr) - s_arr, 0.0)
    foot = maps.flow.chi(-s_arr, m_arr)
    return maps.pi(m_arr) * maps.proliferating_kernel(s_arr, m_arr) * data.gamma_surface(foot, age)


def source_F(t: ArrayLike, m: ArrayLike, x: ArrayLike, maps: CommitmentMaps, data: InitialData) -> NDArray[np.float64]:
    """
    Quellterm F(t,m,x) der ruhenden Phase.

    Für t ≤ τ(Δ(m)) speist die Anfangsfläche Γ (Ω_Δ-Zweig), sonst gilt F = ζ(m)·β(Δ(m),x)·x.
    """
    t_arr, m_arr, x_arr = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(m, dtype=float), np.asarray(x, dtype=float)
    )
    delta = maps.delta(m_arr)
    result = maps.zeta(m_arr) * maps.coefficients.beta(delta, x_arr) * x_arr
    initial = t_arr <= maps.tau_delta(m_arr)
    if np.any(initial):
        result = np.where(initial, initial_branch_F(t_arr, m_arr, maps, data), result)
    return result


def source_G(t: ArrayLike, m: ArrayLike, x: ArrayLike, maps: CommitmentMaps, data: InitialData) -> NDArray[np.float64]:
    """
    Quellterm G(t,m,x) der proliferierenden Phase.

    Für t ≤ τ(Θ(m)) speist die Anfangsfläche Γ (Ω_Θ-Zweig), sonst gilt G = π(m)·ξ(τ(Θ(m)),m)·β(Θ(m),x)·x.
    """
    t_arr, m_arr, x_arr = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(m, dtype=float), np.asarray(x, dtype=float)
    )
    theta = maps.theta(m_arr)
    result = maps.pi(m_arr) * maps.xi_theta(m_arr) * maps.coefficients.beta(theta, x_arr) * x_arr
    initial = t_arr <= maps.tau_theta(m_arr)
    if np.any(initial):
        result = np.where(initial, initial_branch_G(t_arr, m_arr, maps, data), result)
    return result


def seam_jumps(data: InitialData, maps: CommitmentMaps, m: ArrayLike) -> tuple[float, float]:
    """
    Größte Sprünge von F und G über ihre Nahtstellen t = τ(Δ(m)) bzw. t = τ(Θ(m)).

    An der Naht ist das verzögerte Argument N(0,·) = μ̄; bei verträglichen Anfangsdaten sind beide Sprünge 0.
    """
    m = np.asarray(m, dtype=float)
    beta = maps.coefficients.beta
    delta = maps.delta(m)
    mu_delta = np.asarray(data.mu_bar(delta), dtype=float) * np.ones(m.shape)
    f_delay = maps.zeta(m) * beta(delta, mu_delta) * mu_delta
    jump_f = np.abs(initial_branch_F(maps.tau_delta(m), m, maps, data) - f_delay)
    theta = maps.theta(m)
    mu_theta = np.asarray(data.mu_bar(theta), dtype=float) * np.ones(m.shape)
    g_delay = maps.pi(m) * maps.xi_theta(m) * beta(theta, mu_theta) * mu_theta
    jump_g = np.abs(initial_branch_G(maps.tau_theta(m), m, maps, data) - g_delay)
    return float(np.max(jump_f)), float(np.max(jump_g))


def build_maturity_grid(nodes: int, smallest_cell: float, g_one: Optional[float] = None) -> NDArray[np.float64]:
    """Verdichtetes Reifegradgitter, ergänzt um die Knickstelle g(1) der Quellterme."""
    grid = graded_maturity_grid(nodes, smallest_cell)
    if g_one is not None and 0.0 < g_one < 1.0:
        grid = np.union1d(grid, [g_one])
    return grid


def _trapezoid(values: NDArray[np.float64], dt: float) -> NDArray[np.float64]:
    return np.tensordot(trapezoid_weights(values.shape[0], dt), values, axes=1)


def _seam_trapezoid(
    f_init: NDArray[np.float64], f_delay: NDArray[np.float64], phi: NDArray[np.float64], dt: float
) -> NDArray[np.float64]:
    """
    Trapezregel für stückweise definierte Integranden.

    Der Zweig am Knoten wird über φ = s − τ(·) gewählt (φ ≤ 0: Anfangszweig). Wechselt der Zweig
    innerhalb eines Panels, wird es an der linearen Nullstelle von φ geteilt.
    """
    a_init = phi[:-1] <= 0.0
    b_init = phi[1:] <= 0.0
    total = np.where(a_init & b_init, 0.5 * dt * (f_init[:-1] + f_init[1:]), 0.0)
    total += np.where(~a_init & ~b_init, 0.5 * dt * (f_delay[:-1] + f_delay[1:]), 0.0)
    cross = a_init != b_init
    if np.any(cross):
        pa, pb = phi[:-1], phi[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.clip(np.where(cross, -pa / np.where(cross, pb - pa, 1.0), 0.0), 0.0, 1.0)
        init_mid = f_init[:-1] + frac * (f_init[1:] - f_init[:-1])
        delay_mid = f_delay[:-1] + frac * (f_delay[1:] - f_delay[:-1])
        rising = frac * 0.5 * dt * (f_init[:-1] + init_mid) + (1.0 - frac) * 0.5 * dt * (delay_mid + f_delay[1:])
        falling = frac * 0.5 * dt * (f_delay[:-1] + delay_mid) + (1.0 - frac) * 0.5 * dt * (init_mid + f_init[1:])
        total += np.where(cross & a_init, rising, 0.0) + np.where(cross & ~a_init, falling, 0.0)
    return np.sum(total, axis=0)


class IntegratedOperator:
    """
    Diskreter Operator H (und Varianten) auf einem festen Gitter.

    Alle von N unabhängigen Größen werden bei der Konstruktion tabelliert: Charakteristikpunkte
    c = χ(−iΔt, m_j), Kerne K und ξ, Interpolationsgewichte, Δ(c), Θ(c), Faktoren ζ(c) bzw. π(c)ξ(τ(Θ(c)),c)
    und die Anfangszweige von F und G.

    Args:
        data (InitialData): Anfangsdaten.
        maps (CommitmentMaps): Tabellierte Festlegungsabbildungen.
        maturities (NDArray): Reifegradgitter mit 0 und 1.
        dt (float): Zeitschritt.
        steps (int): Anzahl K der Zeitschritte, Horizont K·dt.
    """

    def __init__(
        self,
        data: InitialData,
        maps: CommitmentMaps,
        maturities: NDArray[np.float64],
        dt: float,
        steps: int,
        resting_kernel: Optional[SurvivalKernel] = None,
    ) -> None:
        coeffs = maps.coefficients
        self.data = data
        self.maps = maps
        self.coefficients = coeffs
        self.maturities = np.asarray(maturities, dtype=float)
        self.dt = float(dt)
        self.steps = int(steps)
        self.origin_index = max(1, math.ceil(maps.tau_max / dt - 1e-9))
        self.times = np.arange(-self.origin_index, self.steps + 1) * self.dt
        self.resting_kernel = resting_kernel or SurvivalKernel(maps.flow, coeffs.resting_loss, "resting")

        lags = np.arange(self.steps + 1) * self.dt
        m = self.maturities
        self.chars = maps.flow.trajectory(lags, m)
        self.resting_survival = self.resting_kernel.table(self.dt, self.steps, m)
        self.proliferating_survival = maps.proliferating_kernel.table(self.dt, self.steps, m)
        self.char_idx, self.char_w = interpolation_weights(m, self.chars)
        self.mu_bar_nodes = np.asarray(data.mu_bar(m), dtype=float) * np.ones(m.shape)
        self.kernel_term = self.resting_survival * np.asarray(data.mu_bar(self.chars), dtype=float)
        self.gamma_bar_chars = gamma_bar_values(data, maps, self.chars)
        self.branch_F = self._branch_tables("F")
        self.branch_G = self._branch_tables("G")
        logger.debug(
            f"IntegratedOperator: dt={self.dt:g}, Schritte={self.steps}, Knoten={m.size}, "
            f"Historienzeilen={self.origin_index}, Anfangszweige F/G={self.branch_F.initial_rows}/{self.branch_G.initial_rows}"
        )

    # ------------------------------------------------------------- tables
    def _branch_tables(self, kind: Branch) -> _BranchTables:
        maps, chars = self.maps, self.chars
        if kind == "F":
            target = maps.delta(chars)
            factor = maps.zeta(chars)
            initial_fn: Callable = initial_branch_F
        else:
            target = maps.theta(chars)
            factor = maps.pi(chars) * maps.xi_theta(chars)
            initial_fn = initial_branch_G
        delay = self.coefficients.division_age(target)
        idx, w = interpolation_weights(self.maturities, target)
        rows = min(self.steps, math.ceil(float(np.max(delay)) / self.dt) + 1)
        initial = np.empty((self.steps + 1, rows + 1, self.maturities.size))
        for l in range(rows + 1):
            initial[:, l, :] = initial_fn(l * self.dt, chars, maps, self.data)
        return _BranchTables(kind, target, delay, factor, idx, w, initial, rows)

    def initial_values(self) -> NDArray[np.float64]:
        """Feldwerte mit Historie μ̄ bis einschließlich t = 0 und Nullen danach."""
        values = np.zeros((self.times.size, self.maturities.size))
        values[: self.origin_index + 1] = self.mu_bar_nodes
        return values

    def field(self, values: NDArray[np.float64], name: str = "N") -> SolutionField:
        return SolutionField(self.times.copy(), self.maturities.copy(), values, self.origin_index, name)

    # ------------------------------------------------------------ gathers
    def _at_chars(self, values: NDArray[np.float64], rows: NDArray[np.intp], i: NDArray[np.intp]) -> NDArray[np.float64]:
        idx, w = self.char_idx[i], self.char_w[i]
        picked = values[rows]
        left = np.take_along_axis(picked, idx, axis=-1)
        right = np.take_along_axis(picked, idx + 1, axis=-1)
        return (1.0 - w) * left + w * right

    def _delayed(
        self, values: NDArray[np.float64], q: NDArray[np.float64], idx: NDArray[np.intp], w: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        row = np.clip(np.floor(q).astype(np.intp), 0, values.shape[0] - 2)
        frac = np.clip(q - row, 0.0, 1.0)
        lower = (1.0 - w) * values[row, idx] + w * values[row, idx + 1]
        upper = (1.0 - w) * values[row + 1, idx] + w * values[row + 1, idx + 1]
        return (1.0 - frac) * lower + frac * upper

    def _node_terms(
        self,
        k: int,
        values: NDArray[np.float64],
        lo: int,
        hi: int,
        branch: _BranchTables,
        survival: NDArray[np.float64],
        weights: Optional[NDArray[np.float64]] = None,
        a_chars: Optional[NDArray[np.float64]] = None,
    ):
        beta = self.coefficients.beta
        l = np.arange(lo, hi + 1)
        i = k - l
        surv = survival[i]
        if weights is not None:
            surv = surv * weights[i]
        chars = self.chars[i]
        n_chars = self._at_chars(values, self.origin_index + l, i)
        flux = surv * beta(chars, n_chars) * n_chars
        extra = surv * a_chars[i] * n_chars if a_chars is not None else None

        s = (l * self.dt)[:, None]
        phi = s - branch.delay[i]
        q = phi / self.dt + self.origin_index
        delayed = self._delayed(values, q, branch.target_idx[i], branch.target_w[i])
        f_delay = surv * branch.factor[i] * beta(branch.target[i], delayed) * delayed
        f_init = np.zeros_like(f_delay)
        early = l <= branch.initial_rows
        if np.any(early):
            f_init[early] = surv[early] * branch.initial[i[early], l[early]]
        return flux, extra, f_delay, f_init, phi

    # ---------------------------------------------------------- operators
    def n_integrals(
        self,
        k: int,
        values: NDArray[np.float64],
        lo: int,
        hi: int,
        weights: Optional[NDArray[np.float64]] = None,
        a_chars: Optional[NDArray[np.float64]] = None,
    ) -> NDArray[np.float64]:
        """−∫β·N + ∫F (+ ∫a·N) über die Panels zwischen den Zeitknoten ``lo`` und ``hi`` für Zeile ``k``."""
        if hi <= lo:
            return np.zeros(self.maturities.size)
        flux, extra, f_delay, f_init, phi = self._node_terms(
            k, values, lo, hi, self.branch_F, self.resting_survival, weights, a_chars
        )
        total = _seam_trapezoid(f_init, f_delay, phi, self.dt) - _trapezoid(flux, self.dt)
        if extra is not None:
            total += _trapezoid(extra, self.dt)
        return total

    def n_base(
        self, k: int, values: NDArray[np.float64], start: int = 0, weights: Optional[NDArray[np.float64]] = None
    ) -> NDArray[np.float64]:
        """
        Kernterm K(t,m)μ̄(χ(−t,m)) bzw. beim Neustart in t₀ der Term K(t−t₀,m)N(t₀,χ(−(t−t₀),m)).

        N(t₀,·) wird zwischen den Knoten mit PCHIP interpoliert; der Fehler gegenüber der
        ungestarteten Form ist damit der Interpolationsfehler dieser einen Zeile.
        """
        if start == 0:
            base = self.kernel_term[k]
            i = k
        else:
            i = k - start
            restart_row = PchipInterpolator(self.maturities, values[self.origin_index + start])
            base = self.resting_survival[i] * restart_row(self.chars[i])
        if weights is not None:
            base = base * weights[i]
        return base

    def h_row(
        self,
        k: int,
        values: NDArray[np.float64],
        start: int = 0,
        weights: Optional[NDArray[np.float64]] = None,
        a_chars: Optional[NDArray[np.float64]] = None,
    ) -> NDArray[np.float64]:
        return self.n_base(k, values, start, weights) + self.n_integrals(k, values, start, k, weights, a_chars)

    def apply(
        self,
        values: NDArray[np.float64],
        start: int = 0,
        weights: Optional[NDArray[np.float64]] = None,
        a_chars: Optional[NDArray[np.float64]] = None,
    ) -> NDArray[np.float64]:
        """Wendet H (bzw. H^a mit Gewichten) auf alle Zeilen ab ``start`` an; frühere Zeilen bleiben."""
        out = values.copy()
        for k in range(start, self.steps + 1):
            out[self.origin_index + k] = self.h_row(k, values, start, weights, a_chars)
        if not np.all(np.isfinite(out)):
            raise NonFiniteError("Nicht-endlicher Integrand bei der Operatorauswertung")
        return out

    def p_row(self, k: int, values: NDArray[np.float64]) -> NDArray[np.float64]:
        """P(t_k,·) = ξΓ̄(χ) + ∫ξβN − ∫ξG."""
        base = self.proliferating_survival[k] * self.gamma_bar_chars[k]
        if k == 0:
            return base
        flux, _, g_delay, g_init, phi = self._node_terms(
            k, values, 0, k, self.branch_G, self.proliferating_survival
        )
        return base + _trapezoid(flux, self.dt) - _seam_trapezoid(g_init, g_delay, phi, self.dt)

    def residual(self, values: NDArray[np.float64]) -> float:
        """sup über alle Knoten t ≥ 0 von |N − H(N)|."""
        applied = self.apply(values)
        return float(np.max(np.abs(applied[self.origin_index :] - values[self.origin_index :])))


class IntegratedSolver:
    """
    Fensterweise Picard-Iteration für N und anschließende Quadratur für P.

    Die Fensterlänge wird so gewählt, dass q = K̃(1+‖ζ‖)L(r)T_w ≤ ``window_safety``; divergiert die
    Iteration dennoch, wird das Fenster halbiert und r verdoppelt.
    """

    def __init__(
        self,
        operator: IntegratedOperator,
        tolerance: Optional[float] = None,
        max_iterations: Optional[int] = None,
        window_safety: Optional[float] = None,
        max_window_steps: Optional[int] = None,
    ) -> None:
        self.operator = operator
        self.tolerance = tolerance or settings.picard_tolerance
        self.max_iterations = max_iterations or settings.picard_max_iterations
        self.window_safety = window_safety or settings.window_safety
        self.max_window_steps = max_window_steps or settings.max_window_steps
        self._lipschitz: dict[float, float] = {}

    def _lipschitz_for(self, radius: float) -> float:
        if radius not in self._lipschitz:
            self._lipschitz[radius], _ = lipschitz_constant(self.operator.coefficients, radius=radius)
        return self._lipschitz[radius]

    def plan_window(self, start_index: int, steps_cap: int, radius: float) -> PicardWindow:
        """
        Plant das nächste Fenster ab Zeitschritt ``start_index``.

        Raises:
            WindowCollapseError: Wenn schon ein einzelner Zeitschritt q ≥ ``window_safety`` ergibt.
        """
        op = self.operator
        steps = min(steps_cap, op.steps - start_index + 1)
        k_tilde = float(np.max(op.resting_survival[: steps + 1]))
        per_step = k_tilde * (1.0 + op.maps.zeta_norm) * self._lipschitz_for(radius) * op.dt
        if per_step > 0.0:
            steps = min(steps, int(math.floor(self.window_safety / per_step)))
        if steps < 1:
            raise WindowCollapseError(
                "Picard-Fenster kürzer als ein Zeitschritt",
                window_start=(start_index - 1) * op.dt,
                radius=radius,
                contraction_estimate=per_step,
            )
        return PicardWindow(
            start_index=start_index,
            stop_index=start_index + steps - 1,
            dt=op.dt,
            contraction_estimate=per_step * steps,
            radius=radius,
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
        )

    def picard_window(self, values: NDArray[np.float64], window: PicardWindow) -> Optional[WindowRecord]:
        """
        Iteriert H auf dem Fenster bis zur Toleranz (Jacobi-Schritte, doppelt gepuffert).

        Zeilen vor dem Fenster sind eingefroren; ihre Panelsummen werden einmal berechnet.
        Gibt ``None`` zurück, wenn die Iteration divergiert (Fensterwerte werden zurückgesetzt).

        Raises:
            ConvergenceError: Iterationsobergrenze überschritten.
            NonFiniteError: Nicht-endliche Iterierte bei einem Ein-Schritt-Fenster.
        """
        op = self.operator
        k0, k1 = window.start_index, window.stop_index
        rows = range(k0, k1 + 1)
        frozen = np.array([op.n_base(k, values) + op.n_integrals(k, values, 0, k0 - 1) for k in rows])
        block = slice(op.origin_index + k0, op.origin_index + k1 + 1)
        backup = values[block].copy()
        values[block] = values[op.origin_index + k0 - 1]
        previous: Optional[float] = None
        ratios: list[float] = []
        for iteration in range(1, window.max_iterations + 1):
            updated = frozen + np.array([op.n_integrals(k, values, k0 - 1, k) for k in rows])
            if not np.all(np.isfinite(updated)):
                values[block] = backup
                if window.steps == 1:
                    raise NonFiniteError("Nicht-endliche Picard-Iterierte", window_start=(k0 - 1) * op.dt)
                return None
            increment = float(np.max(np.abs(updated - values[block])))
            values[block] = updated
            logger.debug(f"Picard-Iteration {iteration} im Fenster [{k0}, {k1}]: Zuwachs {increment:.3e}")
            if previous is not None and previous > 1e-13:
                ratios.append(increment / previous)
            if increment <= window.tolerance:
                return WindowRecord(
                    start=(k0 - 1) * op.dt,
                    stop=k1 * op.dt,
                    steps=window.steps,
                    iterations=iteration,
                    contraction_estimate=window.contraction_estimate,
                    radius=window.radius,
                    last_increment=increment,
                    max_observed_ratio=max(ratios) if ratios else None,
                )
            if previous is not None and iteration >= 3 and increment > previous:
                logger.warning(f"Picard-Iteration divergiert im Fenster ab t={(k0 - 1) * op.dt:g}")
                values[block] = backup
                return None
            previous = increment
        raise ConvergenceError(
            "Iterationsobergrenze der Picard-Iteration überschritten",
            window_start=(k0 - 1) * op.dt,
            iterations=window.max_iterations,
            last_increment=previous,
        )

    def solve(self) -> SolveResult:
        """
        Löst N fensterweise und berechnet P je akzeptiertem Fenster.

        Raises:
            WindowCollapseError: Fenster unter einen Zeitschritt geschrumpft.
            ConvergenceError: Iterationsobergrenze überschritten.
        """
        op = self.operator
        values = op.initial_values()
        p_values = np.zeros((op.steps + 1, op.maturities.size))
        p_values[0] = op.p_row(0, values)
        radius = float(np.max(np.abs(op.mu_bar_nodes))) + 1.0
        records: list[WindowRecord] = []
        failures = 0
        steps_cap = self.max_window_steps
        k = 1
        logger.info(f"Starte Picard-Iteration: Horizont {op.steps * op.dt:g}, dt={op.dt:g}, r={radius:g}")
        while k <= op.steps:
            window = self.plan_window(k, steps_cap, radius)
            record = self.picard_window(values, window)
            if record is None:
                failures += 1
                steps_cap = window.steps // 2
                radius *= 2.0
                if steps_cap < 1:
                    raise WindowCollapseError(
                        "Picard-Fenster kürzer als ein Zeitschritt",
                        window_start=(k - 1) * op.dt,
                        radius=radius,
                        contraction_estimate=window.contraction_estimate,
                    )
                continue
            for kk in range(window.start_index, window.stop_index + 1):
                p_values[kk] = op.p_row(kk, values)
            records.append(record)
            logger.info(
                f"Fenster [{record.start:g}, {record.stop:g}] konvergiert nach {record.iterations} Iterationen "
                f"(q={record.contraction_estimate:.3g})"
            )
            k = window.stop_index + 1
            steps_cap = self.max_window_steps
            radius = max(radius, float(np.max(np.abs(values))) + 1.0)

        jump_f, jump_g = seam_jumps(op.data, op.maps, op.maturities)
        if max(jump_f, jump_g) > 1e-10:
            logger.warning(f"Quellterme springen an den Nahtstellen: F {jump_f:.3e}, G {jump_g:.3e}")
        diagnostics = SolveDiagnostics(
            dt=op.dt,
            maturity_nodes=int(op.maturities.size),
            horizon=op.steps * op.dt,
            windows=records,
            total_iterations=sum(r.iterations for r in records),
            window_failures=failures,
            radius=radius,
            k_tilde=float(np.max(op.resting_survival)),
            zeta_norm=op.maps.zeta_norm,
            seam_jump_F=jump_f,
            seam_jump_G=jump_g,
        )
        p_field = SolutionField(
            op.times[op.origin_index :].copy(), op.maturities.copy(), p_values, origin_index=0, name="P"
        )
        logger.success(f"Lösung berechnet: {len(records)} Fenster, {diagnostics.total_iterations} Iterationen")
        return SolveResult(N=op.field(values, "N"), P=p_field, diagnostics=diagnostics, operator=op)


def default_dt(maps: CommitmentMaps, steps_per_min_delay: Optional[int] = None) -> float:
    """Δt = τ_Δ / ``steps_per_min_delay`` (Default 20)."""
    return maps.tau_delta_min / (steps_per_min_delay or settings.steps_per_min_delay)


def build_operator(
    data: InitialData,
    maps: CommitmentMaps,
    horizon: float,
    dt: Optional[float] = None,
    maturities: Optional[NDArray[np.float64]] = None,
) -> IntegratedOperator:
    """Baut den diskreten Operator auf dem Standardgitter (oder den übergebenen Gittern)."""
    dt = dt or default_dt(maps)
    if maturities is None:
        maturities = build_maturity_grid(settings.maturity_nodes, settings.smallest_cell, maps.g_one)
    return IntegratedOperator(data, maps, maturities, dt, steps_for_horizon(horizon, dt))


def picard_step(
    field_in: SolutionField,
    data: InitialData,
    maps: CommitmentMaps,
    start_time: float = 0.0,
    operator: Optional[IntegratedOperator] = None,
) -> SolutionField:
    """
    Ein Picard-Schritt: H(N) auf dem Gitter von ``field_in``.

    Mit ``start_time`` > 0 wird die in t₀ neu gestartete Form ausgewertet (Kernterm aus N(t₀,·));
    Zeilen vor t₀ bleiben unverändert.
    """
    if operator is None:
        operator = IntegratedOperator(
            data, maps, field_in.maturities, field_in.dt, field_in.times.size - 1 - field_in.origin_index
        )
    if operator.times.size != field_in.times.size or operator.origin_index != field_in.origin_index:
        raise FieldRangeError("Feld und Operator haben unterschiedliche Zeitgitter")
    start = int(round(start_time / operator.dt))
    return field_in.with_values(operator.apply(field_in.values, start=start))


def solve(
    data: InitialData,
    maps: CommitmentMaps,
    horizon: float,
    tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
    dt: Optional[float] = None,
    maturities: Optional[NDArray[np.float64]] = None,
) -> SolveResult:
    """
    Löst die integrierte Formulierung auf [0, horizon].

    Returns:
        SolveResult: Felder N (mit Historie) und P, Diagnosen und der verwendete Operator.
    """
    operator = build_operator(data, maps, horizon, dt=dt, maturities=maturities)
    return IntegratedSolver(operator, tolerance=tolerance, max_iterations=max_iterations).solve()


def eval_field(field_in: SolutionField, t: ArrayLike, m: ArrayLike) -> NDArray[np.float64]:
    """Bilineare Auswertung eines Lösungsfeldes."""
    return field_in.eval(t, m)
