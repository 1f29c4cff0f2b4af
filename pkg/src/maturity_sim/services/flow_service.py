"""
Charakteristischer Fluss χ(s,m), Flugzeiten und Überlebenskerne K, ξ.

χ(s,m) ist der Reifegrad zur Zeit s ≤ 0 auf der Charakteristik durch (0,m), d. h. dχ/ds = V(χ).
Für die Potenzfamilie V = α·m^p wird die geschlossene Form verwendet, sonst ein adaptiver
ODE-Löser (``scipy.integrate.solve_ivp``) in der Variablen ln χ.
"""

import math
from typing import Callable, Literal, Optional

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad, solve_ivp

from maturity_sim.config.settings import settings
from maturity_sim.errors import CoefficientError, DomainError, FlowIntegrationError, QuadratureError
from maturity_sim.models.functions import CoefficientFunction, PowerFunction, TabulatedFunction

FlowBackend = Literal["analytic", "numeric"]
KernelKind = Literal["resting", "proliferating", "auxiliary"]


class CharacteristicFlow:
    """
    Rückwärtsfluss entlang der Charakteristiken von dχ/ds = V(χ).

    Die Instanz ist nach der Konstruktion unveränderlich; alle Methoden sind rein.

    Args:
        velocity: Reifungsgeschwindigkeit V.
        backend: ``analytic`` (nur Potenzfamilie) oder ``numeric``; Default je nach Familie.
        rtol, atol: Toleranzen des ODE-Backends.
        frozen_threshold: Unterhalb dieses Reifegrads wird die Rate V(χ)/χ eingefroren.
    """

    def __init__(
        self,
        velocity: PowerFunction | TabulatedFunction,
        backend: Optional[FlowBackend] = None,
        rtol: Optional[float] = None,
        atol: Optional[float] = None,
        frozen_threshold: Optional[float] = None,
    ) -> None:
        if backend is None:
            backend = "analytic" if isinstance(velocity, PowerFunction) else "numeric"
        if backend == "analytic" and not isinstance(velocity, PowerFunction):
            raise CoefficientError("Das analytische Backend verlangt die Potenzfamilie V = α·m^p")
        self.velocity = velocity
        self.backend: FlowBackend = backend
        self.rtol = rtol or settings.ode_rtol
        self.atol = atol or settings.ode_atol
        self.frozen_threshold = frozen_threshold or settings.frozen_threshold
        logger.debug(f"CharacteristicFlow initialisiert (backend={backend}, V={velocity!r})")

    def velocity_derivative(self, m: ArrayLike) -> NDArray[np.float64]:
        return self.velocity.derivative(m)

    # ------------------------------------------------------------------ chi
    def chi(self, s: ArrayLike, m: ArrayLike) -> NDArray[np.float64]:
        """
        Reifegrad χ(s,m) für s ≤ 0 und m ∈ [0,1]; Ergebnis liegt in [0,m].

        Raises:
            DomainError: Für s > 0 oder m außerhalb von [0,1].
            FlowIntegrationError: Wenn das numerische Backend die Toleranz verfehlt.
        """
        s_arr, m_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(m, dtype=float))
        if np.any(s_arr > 0.0):
            raise DomainError("Der Fluss ist nur für s ≤ 0 definiert", s_max=float(np.max(s_arr)))
        if np.any((m_arr < 0.0) | (m_arr > 1.0 + 1e-12)):
            raise DomainError("Reifegrad außerhalb von [0,1]", m_min=float(np.min(m_arr)), m_max=float(np.max(m_arr)))
        if self.backend == "analytic":
            return self._chi_power(s_arr, m_arr)
        return self._chi_numeric(s_arr, m_arr)

    def _chi_power(self, s: NDArray[np.float64], m: NDArray[np.float64]) -> NDArray[np.float64]:
        alpha, p = self.velocity.alpha, self.velocity.p  # type: ignore[union-attr]
        if p == 1.0:
            return m * np.exp(alpha * s)
        positive = m > 0.0
        safe_m = np.where(positive, m, 1.0)
        base = np.power(safe_m, 1.0 - p) - (p - 1.0) * alpha * s
        return np.where(positive, np.power(base, -1.0 / (p - 1.0)), 0.0)

    def _chi_numeric(self, s: NDArray[np.float64], m: NDArray[np.float64]) -> NDArray[np.float64]:
        result = np.array(m, dtype=float, copy=True)
        active = (m > 0.0) & (s < 0.0)
        if not np.any(active):
            return result
        s_act = s[active]
        y0 = np.log(m[active])

        # Zeitumskalierung τ ∈ [0,1]: dy/dτ = s·r(e^y) mit r(χ) = V(χ)/χ
        def rhs(_: float, y: NDArray[np.float64]) -> NDArray[np.float64]:
            return s_act * self._log_rate(np.exp(y))

        solution = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=self.rtol, atol=self.atol)
        if not solution.success:
            raise FlowIntegrationError(
                "Adaptive Integration der Charakteristiken fehlgeschlagen",
                message_solver=solution.message,
                points=int(s_act.size),
            )
        result[active] = np.exp(solution.y[:, -1])
        return result

    def _log_rate(self, chi: NDArray[np.float64]) -> NDArray[np.float64]:
        frozen = np.maximum(chi, self.frozen_threshold)
        return self.velocity(frozen) / frozen

    def trajectory(self, times: ArrayLike, m: ArrayLike) -> NDArray[np.float64]:
        """
        Tabelle χ(−t_i, m_j) für nichtnegative Zeiten ``times`` und Reifegrade ``m``.

        Returns:
            NDArray: Form (len(times), len(m)).
        """
        times = np.asarray(times, dtype=float)
        m = np.asarray(m, dtype=float)
        if np.any(times < 0.0):
            raise DomainError("Trajektorienzeiten müssen nichtnegativ sein")
        if self.backend == "analytic":
            return self._chi_power(-times[:, None], m[None, :])
        table = np.tile(m, (times.size, 1))
        positive = m > 0.0
        if not np.any(positive) or np.all(times == 0.0):
            return table
        order = np.argsort(times)
        solution = solve_ivp(
            lambda _, y: -self._log_rate(np.exp(y)),
            (0.0, float(times[order[-1]])),
            np.log(m[positive]),
            method="DOP853",
            t_eval=times[order],
            rtol=self.rtol,
            atol=self.atol,
        )
        if not solution.success:
            raise FlowIntegrationError("Adaptive Integration der Trajektorien fehlgeschlagen", message_solver=solution.message)
        values = np.exp(solution.y.T)
        sub = table[order]
        sub[:, positive] = values
        table[order] = sub
        return table

    # ------------------------------------------------------ time of flight
    def time_of_flight(self, m1: ArrayLike, m2: ArrayLike) -> NDArray[np.float64]:
        """
        Flugzeit ∫_{m1}^{m2} ds/V(s) für 0 < m1 ≤ m2 ≤ 1.

        Raises:
            DomainError: Für m1 ≤ 0 (das Integral divergiert) oder m1 > m2.
        """
        a, b = np.broadcast_arrays(np.asarray(m1, dtype=float), np.asarray(m2, dtype=float))
        if np.any(a <= 0.0):
            raise DomainError("Die Flugzeit ab m1 = 0 divergiert", m1_min=float(np.min(a)))
        if np.any(a > b * (1.0 + 1e-14)) or np.any(b > 1.0 + 1e-12):
            raise DomainError("Erwartet 0 < m1 ≤ m2 ≤ 1")
        if isinstance(self.velocity, PowerFunction):
            alpha, p = self.velocity.alpha, self.velocity.p
            if p == 1.0:
                return np.log(b / a) / alpha
            return (np.power(a, 1.0 - p) - np.power(b, 1.0 - p)) / (alpha * (p - 1.0))
        flat_a, flat_b = a.ravel(), b.ravel()
        out = np.empty(flat_a.size)
        for i, (lo, hi) in enumerate(zip(flat_a, flat_b)):
            out[i] = 0.0 if hi <= lo else quad(lambda x: 1.0 / float(self.velocity(x)), lo, hi, limit=200)[0]
        return out.reshape(a.shape)


class SurvivalKernel:
    """
    Überlebenskern exp{−∫₀ᵗ [μ(χ(−s,m)) + V'(χ(−s,m))] ds}.

    ``kind="resting"`` mit μ = δ liefert K, ``kind="proliferating"`` mit μ = γ liefert ξ.
    ``kind="auxiliary"`` integriert eine beliebige Rate ohne den Term V' (Gewichte der Operatorfamilie H^a).
    Die Integrale werden mit zusammengesetzter Gauss-Legendre-Quadratur entlang s berechnet
    (Default 16 Knoten pro Zeiteinheit); die Fehlerschätzung vergleicht mit der halben Knotenzahl.
    """

    def __init__(
        self,
        flow: CharacteristicFlow,
        mortality: CoefficientFunction | Callable[[NDArray[np.float64]], NDArray[np.float64]],
        kind: KernelKind,
        nodes_per_unit: Optional[int] = None,
        tolerance: Optional[float] = None,
    ) -> None:
        self.flow = flow
        self.mortality = mortality
        self.kind: KernelKind = kind
        self.nodes_per_unit = nodes_per_unit or settings.gauss_nodes_per_unit
        self.tolerance = tolerance or settings.quadrature_tolerance
        self._nodes, self._weights = leggauss(self.nodes_per_unit)
        self._coarse_nodes, self._coarse_weights = leggauss(max(2, self.nodes_per_unit // 2))

    def rate(self, m: ArrayLike) -> NDArray[np.float64]:
        """Integrand μ(m) + V'(m)."""
        rate = np.asarray(self.mortality(m), dtype=float) * np.ones(np.shape(m))
        if self.kind == "auxiliary":
            return rate
        return rate + self.flow.velocity_derivative(m)

    def _panel_integral(
        self, start: NDArray[np.float64], length: NDArray[np.float64], m: NDArray[np.float64], nodes, weights
    ) -> NDArray[np.float64]:
        # ∫_{start}^{start+length} rate(χ(−s,m)) ds, elementweise
        s = start[..., None] + 0.5 * length[..., None] * (nodes + 1.0)
        values = self.rate(self.flow.chi(-s, np.broadcast_to(m[..., None], s.shape)))
        return 0.5 * length * np.sum(values * weights, axis=-1)

    def integrate(self, t0: ArrayLike, t1: ArrayLike, m: ArrayLike) -> NDArray[np.float64]:
        """
        ∫_{t0}^{t1} rate(χ(−s,m)) ds mit Panels der Länge ≤ 1.

        Raises:
            QuadratureError: Nicht-endlicher Integrand oder Fehlerschätzung über der Toleranz.
        """
        a, b, mm = np.broadcast_arrays(
            np.asarray(t0, dtype=float), np.asarray(t1, dtype=float), np.asarray(m, dtype=float)
        )
        span = b - a
        if a.size == 0:
            return np.zeros(a.shape)
        panels = max(1, math.ceil(float(np.max(span)) if span.size else 0.0))
        length = span / panels
        total = np.zeros(a.shape)
        for k in range(panels):
            start = a + k * length
            fine = self._panel_integral(start, length, mm, self._nodes, self._weights)
            coarse = self._panel_integral(start, length, mm, self._coarse_nodes, self._coarse_weights)
            if not np.all(np.isfinite(fine)):
                bad = np.unravel_index(int(np.argmax(~np.isfinite(fine))), fine.shape)
                raise QuadratureError(
                    "Nicht-endlicher Integrand im Überlebenskern",
                    kernel=self.kind,
                    subinterval=(float(start[bad]), float(start[bad] + length[bad])),
                )
            error = np.abs(fine - coarse)
            limit = self.tolerance * (1.0 + np.abs(fine))
            if np.any(error > limit):
                bad = np.unravel_index(int(np.argmax(error - limit)), error.shape)
                raise QuadratureError(
                    "Fehlerschätzung der Gauss-Legendre-Quadratur über der Toleranz",
                    kernel=self.kind,
                    subinterval=(float(start[bad]), float(start[bad] + length[bad])),
                    estimate=float(error[bad]),
                )
            total += fine
        return total

    def __call__(self, t: ArrayLike, m: ArrayLike) -> NDArray[np.float64]:
        """Kernwert für t ≥ 0 und m ∈ [0,1]."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0.0):
            raise DomainError("Der Überlebenskern ist nur für t ≥ 0 definiert")
        return np.exp(-self.integrate(np.zeros_like(t_arr), t_arr, m))

    def table(self, dt: float, steps: int, m: ArrayLike) -> NDArray[np.float64]:
        """
        Kernwerte auf dem Zeitgitter t_i = i·dt, i = 0..steps, für alle Reifegrade.

        Die Integrale werden schrittweise kumuliert; je Schritt wird entlang der exakten Charakteristik
        integriert.

        Returns:
            NDArray: Form (steps+1, len(m)).
        """
        m = np.asarray(m, dtype=float)
        starts = (np.arange(steps) * dt)[:, None] * np.ones((1, m.size))
        increments = self.integrate(starts, starts + dt, np.broadcast_to(m, starts.shape))
        logs = np.vstack([np.zeros((1, m.size)), np.cumsum(increments, axis=0)])
        return np.exp(-logs)


def chi(flow: CharacteristicFlow, s: ArrayLike, m: ArrayLike) -> NDArray[np.float64]:
    """χ(s,m) für s ≤ 0."""
    return flow.chi(s, m)


def time_of_flight(flow: CharacteristicFlow, m1: ArrayLike, m2: ArrayLike) -> NDArray[np.float64]:
    """Flugzeit von m1 nach m2."""
    return flow.time_of_flight(m1, m2)


def survival_kernel(kernel: SurvivalKernel, t: ArrayLike, m: ArrayLike) -> NDArray[np.float64]:
    """K(t,m) bzw. ξ(t,m)."""
    return kernel(t, m)
