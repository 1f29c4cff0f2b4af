"""
SweepService: Stabilitätsurteil und beobachtete Abklingrate über einem Parametergitter.

Jeder Gitterpunkt ist unabhängig; die Punkte laufen parallel (joblib, Threads). Fehler einzelner
Punkte werden in der Tabelle vermerkt, der Sweep läuft weiter.
"""

import itertools
from pathlib import Path
from typing import Optional, Sequence

from joblib import Parallel, delayed
from loguru import logger

from maturity_sim.config.settings import Settings, settings
from maturity_sim.errors import MaturitySimError
from maturity_sim.models.reports import SweepRow
from maturity_sim.models.scenario import Scenario, SweepAxis
from maturity_sim.services import analysis_service as analysis
from maturity_sim.services.protocols import ReportServiceProtocol, ScenarioServiceProtocol, SweepServiceProtocol
from maturity_sim.services.simulation_service import SimulationService

SWEEP_FILE = "sweep.csv"
RESULT_COLUMNS = ["verdict", "margin", "decay_rate", "agreement", "error"]


class SweepService(SweepServiceProtocol):
    """
    Führt Parameter-Sweeps aus.

    Args:
        scenario_service (ScenarioServiceProtocol): Setzt Parameterwerte in Szenarien.
        simulation_service (SimulationService): Liefert Abbildungen, Zertifikat und Lösung je Punkt.
        report_service (ReportServiceProtocol): Schreibt Punkt- und Tabellendateien.
    """

    def __init__(
        self,
        scenario_service: ScenarioServiceProtocol,
        simulation_service: SimulationService,
        report_service: ReportServiceProtocol,
        settings: Settings = settings,
    ) -> None:
        logger.debug("Initialisiere SweepService.")
        self.scenario_service = scenario_service
        self.simulation_service = simulation_service
        self.report_service = report_service
        self.settings = settings

    @staticmethod
    def grid_points(axes: Sequence[SweepAxis]) -> list[dict[str, float]]:
        """Kartesisches Produkt der Achsen; ohne Achsen oder mit leerer Achse keine Punkte."""
        if not axes:
            return []
        names = [axis.name for axis in axes]
        return [
            dict(zip(names, (float(v) for v in combo))) for combo in itertools.product(*(a.values() for a in axes))
        ]

    def evaluate_point(self, scenario: Scenario, point: dict[str, float], horizon: float) -> SweepRow:
        """Zertifikat, kurze Lösung und Abklinganpassung für einen Gitterpunkt."""
        try:
            for name, value in point.items():
                scenario = self.scenario_service.with_parameter(scenario, name, value)
            coeffs, _, maps, data = self.simulation_service.prepare(scenario)
            certificate, _ = self.simulation_service.certificate_for(scenario, coeffs, maps, data)
            result = self.simulation_service.solve_scenario(scenario, maps, data, horizon=horizon)
            t_start = maps.tau_max if result.N.horizon > maps.tau_max + result.N.dt else 0.0
            fit = analysis.decay_rate_estimate(result.N, t_start=t_start)
        except MaturitySimError as exc:
            logger.warning(f"Sweep-Punkt {point} fehlgeschlagen: {exc.message}")
            return SweepRow(point=point, error=f"{type(exc).__name__}: {exc.message}")
        except Exception as exc:
            logger.exception(f"Unerwarteter Fehler im Sweep-Punkt {point}")
            return SweepRow(point=point, error=f"{type(exc).__name__}: {exc}")
        return SweepRow(
            point=point,
            verdict=certificate.verdict_corollary,
            margin=certificate.margin_corollary,
            decay_rate=fit.rate,
            agreement=(not certificate.verdict_corollary) or fit.rate > 0.0,
        )

    def record_point(
        self, scenario: Scenario, point: dict[str, float], horizon: float, out_dir: Path, index: int
    ) -> SweepRow:
        """Wertet einen Punkt aus und schreibt sofort ``points/point_NNNN.json``."""
        row = self.evaluate_point(scenario, point, horizon)
        self.report_service.write_json(out_dir / "points" / f"point_{index:04d}.json", row)
        return row

    def sweep_stability(
        self,
        scenario: Scenario,
        out_dir: Path,
        axes: Optional[Sequence[SweepAxis]] = None,
        threads: Optional[int] = None,
    ) -> list[SweepRow]:
        """
        Wertet alle Gitterpunkte aus und schreibt ``sweep.csv``.

        Returns:
            list[SweepRow]: Eine Zeile pro Gitterpunkt, in der Reihenfolge des Produkts.
        """
        out_dir = Path(out_dir)
        axes = list(scenario.run.sweep_axes if axes is None else axes)
        points = self.grid_points(axes)
        horizon = scenario.run.sweep_horizon or scenario.run.horizon
        logger.info(f"Sweep über {[a.name for a in axes]}: {len(points)} Punkte, Horizont {horizon:g}")
        with Parallel(n_jobs=threads or self.settings.threads, prefer="threads") as parallel:
            rows: list[SweepRow] = list(
                parallel(
                    delayed(self.record_point)(scenario, point, horizon, out_dir, index)
                    for index, point in enumerate(points)
                )
            )

        names = [axis.name for axis in axes]
        table = [
            [row.point[name] for name in names] + [row.verdict, row.margin, row.decay_rate, row.agreement, row.error]
            for row in rows
        ]
        path = self.report_service.write_table(out_dir / SWEEP_FILE, names + RESULT_COLUMNS, table)
        disagreements = sum(1 for row in rows if row.agreement is False)
        if disagreements:
            logger.warning(f"{disagreements} Sweep-Punkte mit positivem Urteil ohne beobachtetes Abklingen")
        logger.success(f"Sweep abgeschlossen: {path}")
        return rows
