"""
Szenario-Dokument mit den Abschnitten ``model``, ``initial``, ``grid`` und ``run``.

Unbekannte Schlüssel werden abgelehnt. Nicht angegebene Gitter- und Laufparameter werden aus den
Settings übernommen, sodass ein geladenes Szenario immer vollständig belegt ist.
"""

from typing import Literal, Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from maturity_sim.config.settings import settings
from maturity_sim.models.coefficients import HillReintroduction
from maturity_sim.models.functions import CoefficientFunction, VelocityFunction
from maturity_sim.models.run_mode import RunMode

SweepParameter = Literal["beta0", "delta0", "gamma0", "alpha"]


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class ModelSection(_Section):
    velocity: VelocityFunction
    division_age: CoefficientFunction
    division_map: CoefficientFunction
    resting_loss: CoefficientFunction
    apoptosis: CoefficientFunction
    reintroduction: HillReintroduction


class InitialSection(_Section):
    """
    Anfangsdaten. Γ(m,a) = Γ₀(m)·e^{−λa} mit λ = ``gamma_age_decay``;
    im Modus ``compatible`` ist Γ₀(m) = β(m,μ̄(m))·μ̄(m).
    """

    mu_bar: CoefficientFunction
    gamma_mode: Literal["compatible", "zero", "function"] = "compatible"
    gamma: Optional[CoefficientFunction] = None
    gamma_age_decay: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _gamma_given_for_function_mode(self) -> "InitialSection":
        if self.gamma_mode == "function" and self.gamma is None:
            raise ValueError("gamma_mode 'function' verlangt den Schlüssel 'gamma'")
        return self


class GridSection(_Section):
    maturity_nodes: int = Field(default_factory=lambda: settings.maturity_nodes, ge=3)
    smallest_cell: float = Field(default_factory=lambda: settings.smallest_cell, gt=0.0, lt=1.0)
    dt: Optional[float] = Field(default=None, gt=0.0)


class SweepAxis(_Section):
    name: SweepParameter
    start: float
    stop: float
    num: int = Field(ge=0)

    def values(self) -> NDArray[np.float64]:
        return np.linspace(self.start, self.stop, self.num)


class RunSection(_Section):
    mode: RunMode = RunMode.SIMULATE
    horizon: float = Field(gt=0.0)
    tolerance: float = Field(default_factory=lambda: settings.picard_tolerance, gt=0.0)
    max_iterations: int = Field(default_factory=lambda: settings.picard_max_iterations, ge=1)
    eps_neighborhood: Optional[float] = Field(default=None, gt=0.0)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0, lt=2**64)
    dump_maps: bool = False
    sweep_axes: list[SweepAxis] = Field(default_factory=list)
    sweep_horizon: Optional[float] = Field(default=None, gt=0.0)


class Scenario(_Section):
    """Vollständig belegtes Szenario eines Laufs."""

    name: str = "custom"
    model: ModelSection
    initial: InitialSection
    grid: GridSection = Field(default_factory=GridSection)
    run: RunSection
