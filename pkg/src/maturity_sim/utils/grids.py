"""
Gitter für Reifegrad und Zeit sowie Interpolationsgewichte.
"""

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq


def graded_maturity_grid(nodes: int, smallest_cell: float) -> NDArray[np.float64]:
    """
    Erzeugt ein zum degenerierten Punkt m=0 hin verdichtetes Gitter auf [0,1].

    Die Knoten sind m_j = (e^{λj/(J−1)} − 1)/(e^λ − 1); λ wird so gewählt, dass die erste Zelle die
    Weite ``smallest_cell`` hat. Ist ein gleichmäßiges Gitter bereits fein genug, wird es verwendet.

    Args:
        nodes (int): Anzahl J der Knoten (≥ 3).
        smallest_cell (float): Gewünschte Weite m_1 − m_0.

    Returns:
        NDArray: Streng wachsende Knoten mit m_0 = 0 und m_{J−1} = 1.

    Beispiel:
        >>> grid = graded_maturity_grid(200, 1e-4)
        >>> float(grid[1])  # doctest: +ELLIPSIS
        0.0001...
    """
    if nodes < 3:
        raise ValueError("Ein Reifegradgitter braucht mindestens 3 Knoten")
    uniform_cell = 1.0 / (nodes - 1)
    if smallest_cell >= uniform_cell:
        return np.linspace(0.0, 1.0, nodes)

    def first_cell(lam: float) -> float:
        return math.expm1(lam / (nodes - 1)) / math.expm1(lam) - smallest_cell

    lam = brentq(first_cell, 1e-9, 700.0, xtol=1e-14)
    j = np.arange(nodes) / (nodes - 1)
    grid = np.expm1(lam * j) / math.expm1(lam)
    grid[0], grid[-1] = 0.0, 1.0
    return grid


def refine_maturity_grid(nodes: int, smallest_cell: float, refine: int = 2) -> tuple[int, float]:
    """Parameter eines um ``refine`` verfeinerten Gitters (Zellweiten geteilt durch ``refine``)."""
    return refine * (nodes - 1) + 1, smallest_cell / refine


def validation_grid(points: int, include_zero: bool = False) -> NDArray[np.float64]:
    """Gleichmäßiges Validierungsgitter auf (0,1] bzw. [0,1]."""
    if include_zero:
        return np.linspace(0.0, 1.0, points)
    return np.linspace(0.0, 1.0, points + 1)[1:]


def interpolation_weights(grid: NDArray[np.float64], points: ArrayLike) -> tuple[NDArray[np.intp], NDArray[np.float64]]:
    """
    Indizes und Gewichte der linearen Interpolation auf einem streng wachsenden Gitter.

    Für jeden Punkt x gilt x ≈ (1−w)·grid[i] + w·grid[i+1] mit 0 ≤ i ≤ len(grid)−2.

    Args:
        grid (NDArray): Stützstellen.
        points (ArrayLike): Auswertungspunkte (werden auf [grid[0], grid[-1]] begrenzt).

    Returns:
        tuple: (Indizes i, Gewichte w) in der Form von ``points``.
    """
    x = np.clip(np.asarray(points, dtype=float), grid[0], grid[-1])
    idx = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(grid) - 2)
    width = grid[idx + 1] - grid[idx]
    weight = (x - grid[idx]) / width
    return idx, np.clip(weight, 0.0, 1.0)


def steps_for_horizon(horizon: float, dt: float) -> int:
    """Anzahl der Zeitschritte, sodass K·dt ≥ horizon (Rundungsrauschen wird abgefangen)."""
    ratio = horizon / dt
    nearest = round(ratio)
    if abs(ratio - nearest) < 1e-9 * max(1.0, ratio):
        return max(1, int(nearest))
    return max(1, math.ceil(ratio))


def trapezoid_weights(count: int, dt: float) -> NDArray[np.float64]:
    """Gewichte der Trapezregel für ``count`` äquidistante Knoten."""
    weights = np.full(count, dt)
    if count > 0:
        weights[0] = weights[-1] = dt / 2.0
    if count == 1:
        weights[0] = 0.0
    return weights
