"""
Koeffizienten und Anfangsdaten des Modells.

``ModelCoefficients`` bündelt V, τ, g, δ, γ und die Wiedereintrittsrate β(m,x);
``InitialData`` hält die altersintegrierten Anfangsfelder μ̄, Γ̄ und die Fläche Γ(m,a).
"""

from typing import Annotated, Callable, Literal, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from maturity_sim.models.functions import CoefficientFunction, VelocityFunction

DensityFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]
SurfaceFunction = Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]
RateFunction = Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]


class HillReintroduction(BaseModel):
    """
    Hill-Funktion β(m,x) = β₀(m)·θ(m)ⁿ / (θ(m)ⁿ + xⁿ) für x ≥ 0 und β₀(m) für x < 0.

    Die Funktion ist in x monoton fallend und erfüllt damit die Regulationshypothese
    (β(m,x) − β(m,0))·x ≤ 0.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["hill"] = "hill"
    beta0: CoefficientFunction
    theta: CoefficientFunction
    n: float = Field(default=2.0, ge=1.0)

    def __call__(self, m: ArrayLike, x: ArrayLike) -> NDArray[np.float64]:
        m, x = np.broadcast_arrays(np.asarray(m, dtype=float), np.asarray(x, dtype=float))
        b0 = self.beta0(m)
        theta_n = np.power(self.theta(m), self.n)
        x_pos = np.where(x > 0.0, x, 0.0)
        hill = b0 * theta_n / (theta_n + np.power(x_pos, self.n))
        return np.where(x < 0.0, b0, hill)

    @property
    def is_hill(self) -> bool:
        return True


class CallableReintroduction(BaseModel):
    """Frei vorgegebene Wiedereintrittsrate β(m,x) (nur in-memory, nicht serialisierbar)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["callable"] = "callable"
    func: RateFunction
    label: str = "callable"

    def __call__(self, m: ArrayLike, x: ArrayLike) -> NDArray[np.float64]:
        m, x = np.broadcast_arrays(np.asarray(m, dtype=float), np.asarray(x, dtype=float))
        return np.asarray(np.broadcast_to(self.func(m, x), m.shape), dtype=float)

    @property
    def is_hill(self) -> bool:
        return False


Reintroduction = Annotated[Union[HillReintroduction, CallableReintroduction], Field(discriminator="kind")]


class ModelCoefficients(BaseModel):
    """
    Alle Koeffizientenfunktionen des Modells.

    Attributes:
        velocity: Reifungsgeschwindigkeit V(m) mit V(0)=0.
        division_age: Teilungsalter τ(m) > 0.
        division_map: Teilungsabbildung g(m) ≤ m, streng wachsend.
        resting_loss: Verlustrate δ(m) der ruhenden Phase.
        apoptosis: Apoptoserate γ(m) der proliferierenden Phase.
        reintroduction: Wiedereintrittsrate β(m,x).
    """

    model_config = ConfigDict(frozen=True)

    velocity: VelocityFunction
    division_age: CoefficientFunction
    division_map: CoefficientFunction
    resting_loss: CoefficientFunction
    apoptosis: CoefficientFunction
    reintroduction: Reintroduction

    def beta(self, m: ArrayLike, x: ArrayLike) -> NDArray[np.float64]:
        return self.reintroduction(m, x)


class InitialData(BaseModel):
    """
    Anfangsdaten des reduzierten Systems.

    Nur μ̄ und Γ gehen in das reduzierte Modell ein; ein altersaufgelöstes μ(m,a) wird nicht gespeichert.

    Attributes:
        mu_bar: μ̄(m), stetig auf [0,1].
        gamma_surface: Γ(m,a) auf Ω_Θ = {0 ≤ a ≤ τ(Θ(m))}.
        gamma_bar: Γ̄(m) = ∫Γ(m,a)da; fehlt es, wird es per Quadratur bestimmt.
        label: Kurzbeschreibung für Diagnosen.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mu_bar: DensityFunction
    gamma_surface: SurfaceFunction
    gamma_bar: Optional[DensityFunction] = None
    label: str = "custom"
