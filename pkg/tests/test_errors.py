"""
Tests für die Fehlerhierarchie und den Fehlerdatensatz.
"""

import json

import numpy as np
import pytest

from maturity_sim.errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    MaturitySimError,
    ScenarioError,
    SolverError,
    WindowCollapseError,
)


def test_to_record_is_json_serialisable():
    error = WindowCollapseError("Fenster zu kurz", window_start=1.5, radius=np.float64(2.0), nodes=np.arange(3))
    record = error.to_record()
    assert record["error"] == "WindowCollapseError"
    assert record["message"] == "Fenster zu kurz"
    assert record["context"] == {"window_start": 1.5, "radius": 2.0, "nodes": [0, 1, 2]}
    json.dumps(record)


@pytest.mark.parametrize("error_class", [WindowCollapseError, ConvergenceError])
def test_solver_errors_share_base(error_class):
    assert issubclass(error_class, SolverError)
    assert issubclass(error_class, MaturitySimError)


def test_domain_error_is_value_error():
    with pytest.raises(ValueError):
        raise DomainError("außerhalb")


def test_context_defaults_to_empty():
    assert ScenarioError("leer").context == {}
    assert BracketError("kein Einschluss", m=0.3).to_record()["context"] == {"m": 0.3}
