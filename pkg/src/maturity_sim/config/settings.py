import os
from pathlib import Path

import yaml
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Anwendungskonfiguration für maturity_sim.

    Alle Werte können über Umgebungsvariablen mit dem Präfix ``MATURITY_SIM_`` überschrieben werden,
    z. B. ``MATURITY_SIM_OUTPUT_DIR``. Szenario-Dateien und CLI-Flags haben Vorrang vor diesen Defaults.

    Attributes:
        output_dir (str): Standard-Ausgabeverzeichnis für Läufe.
        threads (int): Anzahl paralleler Jobs für Sweeps und Stetigkeitsproben.
        seed (int): Standard-Seed für randomisierte Audits.
        picard_tolerance (float): Abbruchtoleranz der Picard-Iteration (Supremumsnorm).
        window_safety (float): Ziel-Kontraktionsschätzung q pro Fenster.
        maturity_nodes (int): Anzahl der Reifegrad-Knoten.

    Beispiel:
        >>> from maturity_sim.config.settings import settings
        >>> print(settings.maturity_nodes)
        200
    """

    debug: bool = Field(default=False, description="Debug-Modus aktivieren")
    output_dir: str = Field(default="./runs", description="Ausgabeverzeichnis für Artefakte")
    log_file: str = Field(default="logs/maturity_sim.log", description="Pfad der rotierenden Logdatei")
    threads: int = Field(default=1, ge=1, description="Parallele Jobs (joblib)")
    seed: int = Field(default=20240501, ge=0, lt=2**64, description="Standard-Seed für randomisierte Audits")

    picard_tolerance: float = Field(default=1e-10, gt=0, description="Toleranz der Picard-Iteration")
    picard_max_iterations: int = Field(default=200, ge=1, description="Iterationsobergrenze pro Fenster")
    window_safety: float = Field(default=0.5, gt=0, lt=1, description="Ziel-Kontraktionsschätzung pro Fenster")
    max_window_steps: int = Field(default=40, ge=1, description="Maximale Fensterlänge in Zeitschritten")

    gauss_nodes_per_unit: int = Field(default=16, ge=2, description="Gauss-Legendre-Knoten pro Zeiteinheit")
    quadrature_tolerance: float = Field(default=1e-9, gt=0, description="Fehlertoleranz der Quadratur")

    ode_rtol: float = Field(default=1e-11, gt=0, description="Relative Toleranz des ODE-Backends")
    ode_atol: float = Field(default=1e-13, gt=0, description="Absolute Toleranz des ODE-Backends")
    frozen_threshold: float = Field(default=1e-8, gt=0, description="Schwelle für eingefrorene Koeffizienten nahe 0")

    bisection_xtol: float = Field(default=1e-12, gt=0, description="Absolute Toleranz der Bisektion für Θ")
    bisection_max_iterations: int = Field(default=80, ge=10, description="Iterationsobergrenze der Bisektion")

    maturity_nodes: int = Field(default=200, ge=3, description="Anzahl der Reifegrad-Knoten")
    smallest_cell: float = Field(default=1e-4, gt=0, lt=1, description="Kleinste Zellweite am Rand m=0")
    steps_per_min_delay: int = Field(default=20, ge=2, description="Zeitschritte pro minimaler Verzögerung τ_Δ")

    validation_grid_points: int = Field(default=1000, ge=10, description="Auflösung des Validierungsgitters")
    csv_significant_digits: int = Field(default=17, ge=6, le=17, description="Signifikante Stellen im CSV")

    model_config = SettingsConfigDict(env_prefix="MATURITY_SIM_", env_file=".env", env_file_encoding="utf-8")

    @classmethod
    def load_from_yaml(cls, path: str = "maturity_sim.yaml") -> "Settings":
        """
        Lädt die Settings aus einer YAML-Datei. Fehlt die Datei, werden Defaults verwendet.
        Gesetzte Umgebungsvariablen haben Vorrang vor den Werten der Datei.
        """
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
            prefix = cls.model_config["env_prefix"]
            return cls(**{key: value for key, value in data.items() if f"{prefix}{key.upper()}" not in os.environ})
        return cls()

    def save_to_yaml(self, path: str = "maturity_sim.yaml") -> None:
        """
        Speichert die aktuellen Settings in eine YAML-Datei.
        """
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.model_dump(), f, allow_unicode=True, sort_keys=False)

    @property
    def csv_format(self) -> str:
        """printf-Format für CSV-Zahlen, z. B. ``%.17g``."""
        return f"%.{self.csv_significant_digits}g"


# src/maturity_sim/config -> src/maturity_sim
PACKAGE_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_PRESETS_PATH = PACKAGE_ROOT / "resources" / "scenarios"


settings = Settings.load_from_yaml()
