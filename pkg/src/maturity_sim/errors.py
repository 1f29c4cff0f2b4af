"""
Fehlerhierarchie für maturity_sim.

Alle Fehler erben von :class:`MaturitySimError` und können über :meth:`MaturitySimError.to_record`
in einen maschinenlesbaren Fehlerdatensatz umgewandelt werden, den die CLI als ``error.json`` schreibt.
"""

from typing import Any


class MaturitySimError(Exception):
    """
    Basisklasse aller fachlichen Fehler.

    Args:
        message (str): Lesbare Fehlermeldung.
        **context: Zusätzliche, JSON-serialisierbare Diagnosewerte.
    """

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context: dict[str, Any] = dict(context)

    def to_record(self) -> dict[str, Any]:
        """
        Liefert den Fehlerdatensatz.

        Returns:
            dict[str, Any]: ``{"error": <Klasse>, "message": ..., "context": {...}}``
        """
        return {"error": type(self).__name__, "message": self.message, "context": _jsonable(self.context)}


class DomainError(MaturitySimError, ValueError):
    """Argumente außerhalb des Definitionsbereichs einer Operation."""


class CoefficientError(MaturitySimError, ValueError):
    """Ungültige Koeffizientenparameter (p<1, nichtpositives τ, nicht monotones g, ...)."""


class FlowIntegrationError(MaturitySimError):
    """Das numerische Charakteristik-Backend erreicht die geforderte Toleranz nicht."""


class QuadratureError(MaturitySimError):
    """Nicht-endlicher Integrand oder Fehlerschätzung oberhalb der Toleranz."""


class BracketError(MaturitySimError):
    """Die Nullstelle für Θ konnte nicht eingeschlossen werden (Teilungsalter-Bedingung verletzt)."""


class SolverError(MaturitySimError):
    """Basisklasse für Fehler der Fixpunkt-Iteration."""


class WindowCollapseError(SolverError):
    """Das Picard-Fenster ist unter einen Zeitschritt geschrumpft."""


class ConvergenceError(SolverError):
    """Die Iterationsobergrenze eines Fensters wurde überschritten."""


class NonFiniteError(SolverError):
    """Ein Integrand oder Iterat ist nicht endlich."""


class FieldRangeError(MaturitySimError, ValueError):
    """Auswertung eines Lösungsfeldes außerhalb seines Gitters."""


class ScenarioError(MaturitySimError):
    """Szenario-Datei kann nicht gelesen oder validiert werden."""


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    return str(value)
