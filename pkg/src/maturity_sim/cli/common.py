"""
Gemeinsame Argumente und Fehlerbehandlung der CLI-Verben.

Alle Verben akzeptieren ``--scenario`` (Pfad oder ``preset:<name>``), ``--out``, ``--horizon``,
``--threads`` und ``--seed``. Fachliche Fehler werden als ``error.json`` ins Ausgabeverzeichnis
geschrieben und führen zum Exit-Status 1; Argumentfehler beendet argparse mit Status 2.
"""

import argparse
from pathlib import Path
from typing import Callable, Optional, Sequence

from loguru import logger

from maturity_sim.config import logging_config  # noqa: F401
from maturity_sim.config.settings import Settings
from maturity_sim.errors import MaturitySimError
from maturity_sim.models.run_mode import RunMode, info_for
from maturity_sim.models.scenario import Scenario
from maturity_sim.services.factory_config import create_service_factory
from maturity_sim.services.service_factory import ServiceFactory

Action = Callable[[argparse.Namespace, Scenario, Path, ServiceFactory], None]


def seed_type(value: str) -> int:
    """Seed im Bereich [0, 2**64)."""
    try:
        seed = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Seed muss eine ganze Zahl sein: {value!r}") from exc
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"Seed außerhalb von [0, 2**64): {seed}")
    return seed


def build_parser(prog: str, description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=prog, description=description)
    parser.add_argument("--scenario", required=True, help="Szenario-Datei oder preset:<name>")
    parser.add_argument("--out", default=None, help="Ausgabeverzeichnis (Default: MATURITY_SIM_OUTPUT_DIR bzw. ./runs)")
    parser.add_argument("--horizon", type=float, default=None, help="Überschreibt run.horizon")
    parser.add_argument("--threads", type=int, default=None, help="Parallele Jobs (joblib)")
    parser.add_argument("--seed", type=seed_type, default=None, help="Überschreibt run.seed")
    return parser


def resolve_output_dir(out: Optional[str]) -> Path:
    """``--out`` hat Vorrang; sonst Settings, die Umgebungsvariable und YAML frisch lesen."""
    path = Path(out) if out else Path(Settings.load_from_yaml().output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


MODE_ACTIONS: dict[RunMode, Action] = {
    RunMode.VALIDATE: lambda args, scenario, out_dir, f: f.get_simulation_service().validate(scenario, out_dir),
    RunMode.SIMULATE: lambda args, scenario, out_dir, f: f.get_simulation_service().run_simulation(
        scenario, out_dir, audit=False, threads=args.threads
    ),
    RunMode.AUDIT: lambda args, scenario, out_dir, f: f.get_simulation_service().run_simulation(
        scenario, out_dir, audit=True, threads=args.threads
    ),
    RunMode.SWEEP: lambda args, scenario, out_dir, f: f.get_sweep_service().sweep_stability(
        scenario, out_dir, threads=args.threads
    ),
    RunMode.MAPS_DUMP: lambda args, scenario, out_dir, f: f.get_simulation_service().dump_maps(scenario, out_dir),
}


def run_command(
    mode: Optional[RunMode],
    argv: Optional[Sequence[str]] = None,
    factory: Optional[ServiceFactory] = None,
) -> int:
    """
    Parst die Argumente, lädt das Szenario und führt die Aktion der Betriebsart aus.

    Ohne ``mode`` entscheidet ``run.mode`` des Szenarios.

    Returns:
        int: 0 bei Erfolg, 1 wenn ein Fehlerdatensatz geschrieben wurde.
    """
    if mode is None:
        prog, description = "maturity-run", "Führt die Betriebsart aus run.mode des Szenarios aus."
    else:
        info = info_for(mode)
        prog, description = f"maturity-{info.verb}", f"{info.description}."
    args = build_parser(prog, description).parse_args(argv)
    out_dir = resolve_output_dir(args.out)
    factory = factory or create_service_factory()
    logger.info(f"{prog}: Szenario {args.scenario}, Ausgabe {out_dir}")
    try:
        scenario_service = factory.get_scenario_service()
        scenario = scenario_service.resolve(args.scenario)
        scenario = scenario_service.apply_overrides(scenario, horizon=args.horizon, seed=args.seed)
        selected = mode or scenario.run.mode
        if mode is None:
            logger.info(f"Betriebsart aus dem Szenario: {selected.value}")
        MODE_ACTIONS[selected](args, scenario, out_dir, factory)
    except MaturitySimError as exc:
        factory.get_report_service().write_error(out_dir, exc)
        return 1
    logger.info(f"{prog} abgeschlossen.")
    return 0
