"""
ReportService: schreibt Felder, Tabellen und Diagnosen eines Laufs.

Alle Dateien werden zuerst als temporäre Datei im Zielverzeichnis geschrieben und danach atomar
umbenannt. Zahlen im CSV werden mit 17 signifikanten Stellen (``%.17g``) und Unix-Zeilenenden
geschrieben, sodass gleiche Läufe bitidentische Dateien liefern.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel

from maturity_sim.config.settings import Settings, settings
from maturity_sim.errors import MaturitySimError
from maturity_sim.services.commitment_service import CommitmentMaps
from maturity_sim.services.protocols import ReportServiceProtocol
from maturity_sim.services.solver_service import SolutionField

FIELDS_FILE = "fields.csv"
MAPS_FILE = "maps.csv"
ERROR_FILE = "error.json"


class ReportService(ReportServiceProtocol):
    """
    Schreibt die Artefakte eines Laufs.

    Args:
        settings (Settings): Liefert das Zahlenformat für CSV-Dateien.
    """

    def __init__(self, settings: Settings = settings) -> None:
        logger.debug("Initialisiere ReportService.")
        self.settings = settings

    def _atomic_write(self, path: Path, writer: Callable[[Any], None]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        handle = tempfile.NamedTemporaryFile(
            "w", dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False, encoding="utf-8", newline="\n"
        )
        try:
            with handle:
                writer(handle)
            os.replace(handle.name, path)
        except BaseException:
            Path(handle.name).unlink(missing_ok=True)
            raise
        logger.debug(f"Datei geschrieben: {path}")
        return path

    def format_number(self, value: Any) -> str:
        if value is None:
            return ""
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if isinstance(value, (int, float, np.integer, np.floating)):
            return self.settings.csv_format % value
        return str(value)

    def write_table(self, path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        """CSV mit Kopfzeile; gemischte Spalten werden einzeln formatiert."""
        cells = np.array([[self.format_number(v) for v in row] for row in rows], dtype=str).reshape(
            len(rows), len(header)
        )

        def writer(handle: Any) -> None:
            np.savetxt(handle, cells, fmt="%s", delimiter=",", header=",".join(header), comments="", newline="\n")

        return self._atomic_write(path, writer)

    def write_numeric(self, path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
        """Rein numerische Spalten gleicher Länge."""
        table = np.column_stack([np.asarray(c, dtype=float) for c in columns])

        def writer(handle: Any) -> None:
            np.savetxt(
                handle,
                table,
                fmt=self.settings.csv_format,
                delimiter=",",
                header=",".join(header),
                comments="",
                newline="\n",
            )

        return self._atomic_write(path, writer)

    def write_fields(self, out_dir: Path, N: SolutionField, P: SolutionField) -> Path:
        """Spalten t, m, N, P; eine Zeile pro Gitterknoten mit t ≥ 0."""
        times, maturities = np.meshgrid(N.future_times, N.maturities, indexing="ij")
        return self.write_numeric(
            Path(out_dir) / FIELDS_FILE,
            ["t", "m", "N", "P"],
            [times.ravel(), maturities.ravel(), N.future_values.ravel(), P.future_values.ravel()],
        )

    def write_maps(self, out_dir: Path, maps: CommitmentMaps) -> Path:
        columns = maps.to_columns()
        return self.write_numeric(Path(out_dir) / MAPS_FILE, list(columns), list(columns.values()))

    def write_json(self, path: Path, payload: BaseModel | Mapping[str, Any]) -> Path:
        if isinstance(payload, BaseModel):
            text = payload.model_dump_json(indent=2)
        else:
            text = json.dumps(payload, indent=2, ensure_ascii=False, default=str)
        return self._atomic_write(Path(path), lambda handle: handle.write(text + "\n"))

    def write_error(self, out_dir: Path, error: MaturitySimError) -> Path:
        """Maschinenlesbarer Fehlerdatensatz ``error.json``."""
        logger.error(f"{type(error).__name__}: {error.message}")
        return self.write_json(Path(out_dir) / ERROR_FILE, error.to_record())
