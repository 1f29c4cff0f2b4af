"""
ScenarioService: Laden, Schreiben und Umbauen von Szenario-Dokumenten.

Szenarien sind YAML-Dokumente mit den Abschnitten ``model``, ``initial``, ``grid`` und ``run``.
Gebündelte Presets liegen unter ``maturity_sim/resources/scenarios`` und werden über ihren Namen
oder die Referenz ``preset:<name>`` geladen.

Beispiel:
    >>> service = ScenarioService()
    >>> scenario = service.resolve("preset:linear_stable")
    >>> scenario.run.horizon
    5.0
"""

from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml
from loguru import logger
from pydantic import ValidationError

from maturity_sim.config.settings import SCENARIO_PRESETS_PATH, Settings, settings
from maturity_sim.errors import ScenarioError
from maturity_sim.models.coefficients import InitialData, ModelCoefficients
from maturity_sim.models.scenario import Scenario
from maturity_sim.services.model_service import compatible_initial_data, initial_data_from_functions
from maturity_sim.services.protocols import ScenarioServiceProtocol

PRESET_PREFIX = "preset:"
REQUIRED_KEYS = ["model", "initial", "run.horizon"]

_PARAMETER_TARGETS = {
    "beta0": ("reintroduction", "beta0"),
    "delta0": ("resting_loss", None),
    "gamma0": ("apoptosis", None),
}


def _validation_context(error: ValidationError) -> dict[str, Any]:
    return {
        "fields": [".".join(str(part) for part in item["loc"]) for item in error.errors()],
        "messages": [item["msg"] for item in error.errors()],
    }


class ScenarioService(ScenarioServiceProtocol):
    """
    Service für Szenario-Dokumente.

    Args:
        settings (Settings): Globale Settings (Preset-Verzeichnis und Defaults).
        presets_path (Path | None): Alternatives Preset-Verzeichnis.
    """

    def __init__(self, settings: Settings = settings, presets_path: Optional[Path] = None) -> None:
        logger.debug("Initialisiere ScenarioService.")
        self.settings = settings
        self.presets_path = Path(presets_path or SCENARIO_PRESETS_PATH)

    # ------------------------------------------------------------------ I/O
    def parse(self, text: str, source: str = "<string>") -> Scenario:
        """
        Validiert ein Szenario aus YAML-Text.

        Raises:
            ScenarioError: Bei Syntaxfehlern (mit Zeile), leerem Dokument oder ungültigen Feldern.
        """
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ScenarioError(f"YAML-Syntaxfehler in {source}", source=source, line=line, detail=str(exc)) from exc
        if not data:
            raise ScenarioError(
                f"Szenario {source} ist leer; erforderlich: {', '.join(REQUIRED_KEYS)}",
                source=source,
                required=REQUIRED_KEYS,
            )
        if not isinstance(data, dict):
            raise ScenarioError(f"Szenario {source} muss eine Zuordnung sein", source=source)
        try:
            scenario = Scenario.model_validate(data)
        except ValidationError as exc:
            context = _validation_context(exc)
            raise ScenarioError(
                f"Ungültiges Szenario {source}: {', '.join(context['fields'])}", source=source, **context
            ) from exc
        return scenario

    def load_scenario(self, path: str | Path) -> Scenario:
        """
        Lädt ein Szenario aus einer Datei und protokolliert die wirksame Konfiguration.

        Raises:
            ScenarioError: Datei fehlt oder ist ungültig.
        """
        path = Path(path)
        if not path.is_file():
            raise ScenarioError(f"Szenario-Datei nicht gefunden: {path}", source=str(path))
        scenario = self.parse(path.read_text(encoding="utf-8"), source=str(path))
        logger.info(f"Szenario '{scenario.name}' geladen aus {path}")
        logger.debug(f"Wirksame Konfiguration:\n{self.write_scenario(scenario)}")
        return scenario

    def write_scenario(self, scenario: Scenario, path: Optional[str | Path] = None) -> str:
        """Kanonisches YAML des Szenarios; schreibt es optional nach ``path``."""
        text = yaml.safe_dump(scenario.model_dump(mode="json"), allow_unicode=True, sort_keys=False)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def available_presets(self) -> list[str]:
        return sorted(p.stem for p in self.presets_path.glob("*.yaml"))

    def load_preset(self, name: str) -> Scenario:
        """
        Lädt ein gebündeltes Preset.

        Raises:
            ScenarioError: Unbekannter Name (mit Liste der vorhandenen Presets).
        """
        path = self.presets_path / f"{name}.yaml"
        if not path.is_file():
            raise ScenarioError(f"Unbekanntes Preset '{name}'", preset=name, available=self.available_presets())
        return self.load_scenario(path)

    def resolve(self, reference: str) -> Scenario:
        """``preset:<name>`` oder Dateipfad."""
        if reference.startswith(PRESET_PREFIX):
            return self.load_preset(reference[len(PRESET_PREFIX) :])
        return self.load_scenario(reference)

    # ------------------------------------------------------------ rewriting
    def _revalidate(self, data: dict[str, Any]) -> Scenario:
        try:
            return Scenario.model_validate(data)
        except ValidationError as exc:
            context = _validation_context(exc)
            raise ScenarioError(f"Ungültige Überschreibung: {', '.join(context['fields'])}", **context) from exc

    def apply_overrides(
        self, scenario: Scenario, horizon: Optional[float] = None, seed: Optional[int] = None
    ) -> Scenario:
        """CLI-Flags haben Vorrang vor den Szenariowerten."""
        if horizon is None and seed is None:
            return scenario
        data = scenario.model_dump()
        if horizon is not None:
            data["run"]["horizon"] = horizon
        if seed is not None:
            data["run"]["seed"] = seed
        return self._revalidate(data)

    def with_parameter(self, scenario: Scenario, name: str, value: float) -> Scenario:
        """
        Setzt einen Sweep-Parameter (β₀, δ₀, γ₀ als Konstanten, α der Potenzfamilie).

        Raises:
            ScenarioError: Unbekannter Parameter oder α bei nicht-potenzförmigem V.
        """
        data = scenario.model_dump()
        model = data["model"]
        if name == "alpha":
            if model["velocity"]["kind"] != "power":
                raise ScenarioError("Der Parameter alpha verlangt V = α·m^p", parameter=name)
            model["velocity"]["alpha"] = value
        elif name in _PARAMETER_TARGETS:
            section, key = _PARAMETER_TARGETS[name]
            constant = {"kind": "constant", "value": value}
            if key is None:
                model[section] = constant
            else:
                model[section][key] = constant
        else:
            raise ScenarioError(f"Unbekannter Sweep-Parameter '{name}'", parameter=name)
        return self._revalidate(data)

    # -------------------------------------------------------------- building
    def build_coefficients(self, scenario: Scenario) -> ModelCoefficients:
        model = scenario.model
        return ModelCoefficients(
            velocity=model.velocity,
            division_age=model.division_age,
            division_map=model.division_map,
            resting_loss=model.resting_loss,
            apoptosis=model.apoptosis,
            reintroduction=model.reintroduction,
        )

    def build_initial_data(self, scenario: Scenario, coeffs: ModelCoefficients) -> InitialData:
        """Anfangsdaten gemäß ``initial.gamma_mode``."""
        initial = scenario.initial
        mu_bar = initial.mu_bar
        if initial.gamma_mode == "compatible":
            return compatible_initial_data(coeffs, mu_bar, initial.gamma_age_decay, label=scenario.name)
        if initial.gamma_mode == "zero":
            return initial_data_from_functions(
                mu_bar, lambda m: np.zeros(np.shape(m)), initial.gamma_age_decay, label=scenario.name
            )
        return initial_data_from_functions(mu_bar, initial.gamma, initial.gamma_age_decay, label=scenario.name)
