"""
Berichte, Zertifikate und Diagnosen der numerischen Services.

Alle Modelle sind JSON-serialisierbar; nicht-endliche Werte (z. B. die Markierung unendlicher
Abklingrate) werden als ``Infinity``/``NaN`` geschrieben.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

CheckStatus = Literal["pass", "fail", "assumed"]


class _Report(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")


class HypothesisCheck(_Report):
    """Ergebnis einer einzelnen Strukturhypothese mit schlechtestem Gitterpunkt."""

    name: str
    status: CheckStatus
    worst_point: Optional[float] = None
    worst_value: Optional[float] = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"


class ValidationReport(_Report):
    grid_resolution: int
    checks: list[HypothesisCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> list[HypothesisCheck]:
        return [check for check in self.checks if not check.passed]

    def get(self, name: str) -> HypothesisCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


class CompatReport(_Report):
    """Prüfung der Verträglichkeit Γ(m,0) = β(m,μ̄(m))·μ̄(m)."""

    passed: bool
    max_relative_deviation: float
    worst_point: Optional[float] = None
    tolerance: float


class RegulationReport(_Report):
    """Stichprobenprüfung der Regulationshypothese (β(m,x) − β(m,0))·x ≤ 0."""

    holds: bool
    samples: int
    max_violation: float
    worst_m: Optional[float] = None
    worst_x: Optional[float] = None
    seed: int


class PositivityReport(_Report):
    applicable: bool
    regulation: RegulationReport
    min_N: float
    min_P: float
    min_loss_group: float
    min_source_group: float
    tolerance: float
    passed: bool
    data_nonnegative: bool


class StabilityCertificate(_Report):
    """
    Konstanten und Urteile der Stabilitätsaussagen.

    ``margin_local`` ist δ̃ − L(1+2κ), ``margin_corollary`` ist min(γ̃, δ̃) − L(1+2κ).
    ``rho``/``c`` sind nur gesetzt, wenn ein zulässiges ρ existiert.
    """

    delta_tilde: float
    gamma_tilde: float
    kappa: float
    lipschitz_L: float
    lipschitz_kind: Literal["hill", "empirical"]
    zeta_norm: float
    tau_max: float
    eps_neighborhood: float
    margin_local: float
    margin_corollary: float
    rho_sup: Optional[float] = None
    rho: Optional[float] = None
    c: Optional[float] = None
    verdict_local: bool
    verdict_corollary: bool
    verdict_global: bool
    global_data_condition: Optional[bool] = None


class DecayFit(_Report):
    rate: float
    prefactor: float
    fit_residual: float
    t_start: float
    samples: int
    rate_including_origin: Optional[float] = None
    infinite: bool = False
    envelope_checked: bool = False
    envelope_violations: int = 0
    envelope_max_ratio: Optional[float] = None


class ContinuityProbeResult(_Report):
    times: list[float]
    deviation: list[float]
    data_distance: float
    ratio: list[float]
    gronwall_constant: list[float]
    bound_holds: bool


class WindowRecord(_Report):
    start: float
    stop: float
    steps: int
    iterations: int
    contraction_estimate: float
    radius: float
    last_increment: float
    max_observed_ratio: Optional[float] = None


class SolveDiagnostics(_Report):
    dt: float
    maturity_nodes: int
    horizon: float
    windows: list[WindowRecord] = Field(default_factory=list)
    total_iterations: int = 0
    window_failures: int = 0
    radius: float
    k_tilde: float
    zeta_norm: float
    seam_jump_F: float = 0.0
    seam_jump_G: float = 0.0


class ResidualReport(_Report):
    residual: float
    refined_residual: Optional[float] = None
    dt: float
    maturity_nodes: int


class EnvelopeReport(_Report):
    """Vergleich eines Feldes mit einer expliziten Schranke."""

    name: str
    violations: int
    max_ratio: float
    passed: bool


class BalanceReport(_Report):
    max_defect: float
    max_scale: float
    relative_defect: float


class RunDiagnostics(_Report):
    """Zusammenfassung eines Simulationslaufs (``diagnostics.json``)."""

    scenario: str
    seed: int
    trivial_equilibrium: bool
    validation: ValidationReport
    compatibility: CompatReport
    certificate: StabilityCertificate
    solve: SolveDiagnostics
    residual: ResidualReport
    positivity: PositivityReport
    decay: DecayFit
    invariance: Optional[EnvelopeReport] = None
    growth: Optional[EnvelopeReport] = None
    balance: Optional[BalanceReport] = None
    sup_N: float
    sup_P: float
    artifacts: list[str] = Field(default_factory=list)


class SweepRow(_Report):
    point: dict[str, float]
    verdict: Optional[bool] = None
    margin: Optional[float] = None
    decay_rate: Optional[float] = None
    agreement: Optional[bool] = None
    error: Optional[str] = None
