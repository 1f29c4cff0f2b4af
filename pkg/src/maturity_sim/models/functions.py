"""
Parameterfamilien für Koeffizientenfunktionen auf [0,1].

Jede Familie ist ein unveränderliches pydantic-Modell mit einem ``kind``-Diskriminator, ist vektorisiert
(numpy) und liefert Wert und Ableitung. Beliebige Funktionen gelangen über :class:`TabulatedFunction`
(monotone PCHIP-Interpolation von Stützstellen) in das Modell.
"""

from typing import Annotated, Literal, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy.interpolate import PchipInterpolator


class _FunctionBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def __call__(self, m: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError

    def derivative(self, m: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError


class ConstantFunction(_FunctionBase):
    """f(m) = value."""

    kind: Literal["constant"] = "constant"
    value: float

    def __call__(self, m: ArrayLike) -> NDArray[np.float64]:
        return np.full(np.shape(m), self.value, dtype=float)

    def derivative(self, m: ArrayLike) -> NDArray[np.float64]:
        return np.zeros(np.shape(m), dtype=float)


class AffineFunction(_FunctionBase):
    """f(m) = intercept + slope·m."""

    kind: Literal["affine"] = "affine"
    intercept: float = 0.0
    slope: float

    def __call__(self, m: ArrayLike) -> NDArray[np.float64]:
        return self.intercept + self.slope * np.asarray(m, dtype=float)

    def derivative(self, m: ArrayLike) -> NDArray[np.float64]:
        return np.full(np.shape(m), self.slope, dtype=float)


class PowerFunction(_FunctionBase):
    """
    f(m) = alpha·m^p.

    Als Reifungsgeschwindigkeit muss p ≥ 1 gelten, damit die Flugzeit von m₀ → 0 divergiert;
    die Prüfung erfolgt in der Koeffizientenvalidierung, nicht hier.
    """

    kind: Literal["power"] = "power"
    alpha: float
    p: float = Field(default=1.0, gt=0)

    def __call__(self, m: ArrayLike) -> NDArray[np.float64]:
        return self.alpha * np.power(np.asarray(m, dtype=float), self.p)

    def derivative(self, m: ArrayLike) -> NDArray[np.float64]:
        m = np.asarray(m, dtype=float)
        if self.p == 1.0:
            return np.full(m.shape, self.alpha, dtype=float)
        with np.errstate(divide="ignore"):
            return self.alpha * self.p * np.power(m, self.p - 1.0)


class TabulatedFunction(_FunctionBase):
    """
    Stützstellen-Adapter für beliebige Funktionen.

    Werte werden monoton (PCHIP) interpoliert, die Ableitung über zentrale Differenzen auf der Tabelle
    und anschließende PCHIP-Interpolation bestimmt. Außerhalb der Stützstellen wird extrapoliert.
    Beide Interpolanten werden beim ersten Aufruf gebaut und wiederverwendet.
    """

    kind: Literal["tabulated"] = "tabulated"
    nodes: tuple[float, ...]
    values: tuple[float, ...]
    _interpolant: Optional[PchipInterpolator] = PrivateAttr(default=None)
    _slope_interpolant: Optional[PchipInterpolator] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_table(self) -> "TabulatedFunction":
        if len(self.nodes) < 2 or len(self.nodes) != len(self.values):
            raise ValueError("nodes und values müssen gleich lang sein (mindestens 2 Einträge)")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes müssen streng monoton wachsen")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values müssen endlich sein")
        return self

    def __call__(self, m: ArrayLike) -> NDArray[np.float64]:
        if self._interpolant is None:
            self._interpolant = PchipInterpolator(self.nodes, self.values, extrapolate=True)
        return np.asarray(self._interpolant(np.asarray(m, dtype=float)), dtype=float)

    def derivative(self, m: ArrayLike) -> NDArray[np.float64]:
        if self._slope_interpolant is None:
            slopes = np.gradient(np.asarray(self.values), np.asarray(self.nodes))
            self._slope_interpolant = PchipInterpolator(self.nodes, slopes, extrapolate=True)
        return np.asarray(self._slope_interpolant(np.asarray(m, dtype=float)), dtype=float)


CoefficientFunction = Annotated[
    Union[ConstantFunction, AffineFunction, PowerFunction, TabulatedFunction],
    Field(discriminator="kind"),
]
"""Diskriminierte Union aller Koeffizientenfamilien (YAML-Feld ``kind``)."""

VelocityFunction = Annotated[Union[PowerFunction, TabulatedFunction], Field(discriminator="kind")]
"""Zulässige Familien für die Reifungsgeschwindigkeit V."""
