"""
SimulationService: Ablauf eines Laufs von der Validierung bis zu den Artefakten.

Ein Lauf validiert die Koeffizienten, tabelliert die Festlegungsabbildungen, berechnet das
Stabilitätszertifikat, löst N und P und schreibt ``fields.csv`` sowie ``diagnostics.json``.
Im Audit-Modus kommen die Operatorfamilie H^a, Invarianz, Wachstumsschranke, P-Bilanz,
verfeinertes Residuum und die Stetigkeitsprobe hinzu (``audit.json``).
"""

from pathlib import Path
from typing import Any, Optional

import numpy as np
from loguru import logger

from maturity_sim.config.settings import Settings, settings
from maturity_sim.errors import CoefficientError
from maturity_sim.models.coefficients import InitialData, ModelCoefficients
from maturity_sim.models.reports import ResidualReport, RunDiagnostics, StabilityCertificate, ValidationReport
from maturity_sim.models.scenario import Scenario
from maturity_sim.services import analysis_service as analysis
from maturity_sim.services.commitment_service import CommitmentMaps, build_commitment_maps
from maturity_sim.services.model_service import check_compatibility, lipschitz_constant, validate_coefficients
from maturity_sim.services.protocols import (
    ReportServiceProtocol,
    ScenarioServiceProtocol,
    SimulationServiceProtocol,
)
from maturity_sim.services.solver_service import SolveResult, build_maturity_grid, solve
from maturity_sim.utils.grids import graded_maturity_grid

DIAGNOSTICS_FILE = "diagnostics.json"
VALIDATION_FILE = "validation.json"
AUDIT_FILE = "audit.json"
CONTINUITY_SHIFT = 1e-3
"""Konstante Verschiebung von μ̄ für die Stetigkeitsprobe im Audit."""


class SimulationService(SimulationServiceProtocol):
    """
    Führt Läufe für Szenarien aus.

    Args:
        scenario_service (ScenarioServiceProtocol): Baut Koeffizienten und Anfangsdaten.
        report_service (ReportServiceProtocol): Schreibt Artefakte.
        settings (Settings): Globale Defaults.
    """

    def __init__(
        self,
        scenario_service: ScenarioServiceProtocol,
        report_service: ReportServiceProtocol,
        settings: Settings = settings,
    ) -> None:
        logger.debug("Initialisiere SimulationService.")
        self.scenario_service = scenario_service
        self.report_service = report_service
        self.settings = settings

    # ------------------------------------------------------------- building
    def prepare(self, scenario: Scenario) -> tuple[ModelCoefficients, ValidationReport, CommitmentMaps, InitialData]:
        """
        Koeffizienten, Validierung, Abbildungen und Anfangsdaten eines Szenarios.

        Raises:
            CoefficientError: Wenn eine Strukturhypothese verletzt ist.
        """
        coeffs = self.scenario_service.build_coefficients(scenario)
        validation = validate_coefficients(coeffs, strict=False)
        if not validation.passed:
            raise CoefficientError(
                "Strukturhypothesen verletzt", failed=[check.name for check in validation.failed()]
            )
        grid = graded_maturity_grid(scenario.grid.maturity_nodes, scenario.grid.smallest_cell)
        maps = build_commitment_maps(coeffs, grid)
        data = self.scenario_service.build_initial_data(scenario, coeffs)
        return coeffs, validation, maps, data

    def solver_grid(self, scenario: Scenario, maps: CommitmentMaps) -> np.ndarray:
        return build_maturity_grid(scenario.grid.maturity_nodes, scenario.grid.smallest_cell, maps.g_one)

    def solve_scenario(
        self, scenario: Scenario, maps: CommitmentMaps, data: InitialData, horizon: Optional[float] = None
    ) -> SolveResult:
        return solve(
            data,
            maps,
            horizon or scenario.run.horizon,
            tolerance=scenario.run.tolerance,
            max_iterations=scenario.run.max_iterations,
            dt=scenario.grid.dt,
            maturities=self.solver_grid(scenario, maps),
        )

    def certificate_for(
        self, scenario: Scenario, coeffs: ModelCoefficients, maps: CommitmentMaps, data: InitialData
    ) -> tuple[StabilityCertificate, bool]:
        """
        Zertifikat mit ε aus dem Szenario oder, falls nicht gesetzt, dem kleinsten Ball um die Daten.

        Returns:
            tuple: (Zertifikat, ob die Daten im ε-Ball liegen)
        """
        lipschitz, _ = lipschitz_constant(coeffs)
        data_radius = analysis.invariance_radius(data, maps, lipschitz)
        eps = scenario.run.eps_neighborhood or data_radius
        certificate = analysis.stability_certificate(coeffs, maps, eps_neighborhood=eps, data=data)
        return certificate, data_radius <= eps * (1.0 + 1e-12)

    # ------------------------------------------------------------- commands
    def validate(self, scenario: Scenario, out_dir: Path) -> ValidationReport:
        """Schreibt ``validation.json``; verletzte Hypothesen führen zu einem Fehler."""
        coeffs = self.scenario_service.build_coefficients(scenario)
        report = validate_coefficients(coeffs, strict=False)
        self.report_service.write_json(Path(out_dir) / VALIDATION_FILE, report)
        if not report.passed:
            raise CoefficientError("Strukturhypothesen verletzt", failed=[check.name for check in report.failed()])
        logger.success(f"Szenario '{scenario.name}': alle Strukturhypothesen erfüllt")
        return report

    def dump_maps(self, scenario: Scenario, out_dir: Path) -> Path:
        _, _, maps, _ = self.prepare(scenario)
        path = self.report_service.write_maps(Path(out_dir), maps)
        logger.success(f"Festlegungsabbildungen geschrieben: {path}")
        return path

    def run_simulation(
        self, scenario: Scenario, out_dir: Path, audit: bool = False, threads: Optional[int] = None
    ) -> RunDiagnostics:
        """
        Löst das Szenario und schreibt Felder und Diagnosen.

        Args:
            scenario (Scenario): Validiertes Szenario.
            out_dir (Path): Ausgabeverzeichnis.
            audit (bool): Zusätzliche Satz-Audits ausführen.
            threads (int | None): Parallele Jobs für die Stetigkeitsprobe.

        Returns:
            RunDiagnostics: Zusammenfassung, auch als ``diagnostics.json`` geschrieben.
        """
        out_dir = Path(out_dir)
        logger.info(f"Starte Lauf '{scenario.name}' (Audit={audit}) nach {out_dir}")
        coeffs, validation, maps, data = self.prepare(scenario)
        compatibility = check_compatibility(data, coeffs)
        certificate, inside_ball = self.certificate_for(scenario, coeffs, maps, data)
        result = self.solve_scenario(scenario, maps, data)
        N, P = result
        residual = ResidualReport(
            residual=result.operator.residual(N.values),
            refined_residual=analysis.refined_residual(N, data, maps) if audit else None,
            dt=result.diagnostics.dt,
            maturity_nodes=result.diagnostics.maturity_nodes,
        )
        positivity = analysis.positivity_audit(N, P, data, maps, seed=scenario.run.seed)
        t_start = maps.tau_max if N.horizon > maps.tau_max + N.dt else 0.0
        decay = analysis.decay_rate_estimate(N, t_start=t_start, certificate=certificate if inside_ball else None)
        trivial = analysis.mu_bar_sup_norm(data) == 0.0 and analysis.gamma_sup_norm(data, maps) == 0.0

        artifacts = [str(self.report_service.write_fields(out_dir, N, P))]
        if scenario.run.dump_maps:
            artifacts.append(str(self.report_service.write_maps(out_dir, maps)))

        invariance = growth = balance = None
        if audit:
            if certificate.verdict_local and inside_ball:
                invariance = analysis.invariance_check(N, certificate.eps_neighborhood)
            growth = analysis.growth_check(N, data, maps, result.diagnostics.k_tilde)
            balance = analysis.proliferating_balance(N, P, data, maps)
            audit_path = self.report_service.write_json(
                out_dir / AUDIT_FILE, self.audit_details(scenario, result, data, maps, threads)
            )
            artifacts.append(str(audit_path))

        diagnostics = RunDiagnostics(
            scenario=scenario.name,
            seed=scenario.run.seed,
            trivial_equilibrium=trivial,
            validation=validation,
            compatibility=compatibility,
            certificate=certificate,
            solve=result.diagnostics,
            residual=residual,
            positivity=positivity,
            decay=decay,
            invariance=invariance,
            growth=growth,
            balance=balance,
            sup_N=float(np.max(np.abs(N.future_values))),
            sup_P=float(np.max(np.abs(P.future_values))),
            artifacts=artifacts + [str(out_dir / DIAGNOSTICS_FILE)],
        )
        self.report_service.write_json(out_dir / DIAGNOSTICS_FILE, diagnostics)
        if trivial:
            logger.info("Triviales Gleichgewicht: Nulldaten")
        logger.success(f"Lauf '{scenario.name}' abgeschlossen: sup N={diagnostics.sup_N:.6g}")
        return diagnostics

    def audit_details(
        self,
        scenario: Scenario,
        result: SolveResult,
        data: InitialData,
        maps: CommitmentMaps,
        threads: Optional[int] = None,
    ) -> dict[str, Any]:
        """H^a-Defekte für a ∈ {0, β(·,0), 0.5, m}, Invarianzfolge und Stetigkeitsprobe."""
        coeffs = maps.coefficients
        N = result.N
        rates = {
            "zero": 0.0,
            "beta_at_zero": lambda m: coeffs.beta(m, np.zeros_like(m)),
            "half": 0.5,
            "identity": lambda m: m,
        }
        defects = {
            name: analysis.ha_invariance_defect(N, rate, data, maps, operator=result.operator)
            for name, rate in rates.items()
        }
        sequence = analysis.invariance_sequence(data, maps, 3, N.horizon, operator=result.operator)
        shifted = data.model_copy(
            update={
                "mu_bar": lambda m: np.asarray(data.mu_bar(m), dtype=float) + CONTINUITY_SHIFT,
                "label": f"{data.label}+shift",
            }
        )
        probe = analysis.continuity_probe(
            data,
            shifted,
            maps,
            N.horizon,
            threads=threads,
            dt=N.dt,
            maturities=N.maturities,
        )
        return {
            "ha_defects": defects,
            "invariance_sequence": sequence,
            "continuity": probe.model_dump(mode="json"),
        }
