"""Level-set design for fixed initial data: maximise G_T over sets of volume L|Omega|.

The best set is a superlevel set of the time-integrated energy density phi.
On a mesh that means taking cells by decreasing mean density until the
volume budget is used up.  A bisection on the threshold provides an
independent route to the same set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateDesignError
from .functionals import InitialData, energy_cell_integrals
from .mesh import Mesh, SubsetIndicator

_TIE = 1e-12
_NON_UNIQUE_SHARE = 0.05


@dataclass(frozen=True, eq=False)
class LevelSetResult:
    threshold: float
    set: SubsetIndicator
    fraction: float
    residual: float
    density: np.ndarray = field(repr=False)
    G: float = 0.0
    dichotomy_threshold: float = float("nan")
    dichotomy_difference: int = 0
    tie_cells: int = 0
    unique: bool = True

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "fraction": self.fraction,
            "residual": self.residual,
            "volume_defect": self.set.volume_defect(),
            "G_T": self.G,
            "dichotomy_threshold": self.dichotomy_threshold,
            "dichotomy_difference_cells": self.dichotomy_difference,
            "tie_cells": self.tie_cells,
            "unique": self.unique,
            "set_cells": [int(c) for c in np.nonzero(self.set.bits)[0]],
        }


def greedy_level_set(density: np.ndarray, measures: np.ndarray, budget: float) -> tuple[np.ndarray, int]:
    """Cells by decreasing density (ties: lowest id) while the volume stays within budget.

    Returns the selection and the position of the last selected cell in the order.
    """
    order = np.argsort(-density, kind="stable")
    cum = np.cumsum(measures[order])
    k = int(np.searchsorted(cum, budget * (1 + 1e-12), side="right"))
    bits = np.zeros(len(density), dtype=bool)
    bits[order[:k]] = True
    return bits, k - 1


def dichotomy_level_set(density: np.ndarray, measures: np.ndarray, budget: float,
                        iterations: int = 200) -> tuple[np.ndarray, float]:
    """Bisection on lam for the monotone map lam -> |{density >= lam}|.

    Cells strictly above the final threshold are kept; the tie layer at the
    threshold is filled by lowest id until the budget is reached.
    """
    lo, hi = float(density.min()), float(density.max())
    # invariant: |{d >= lo}| > budget (or lo is the minimum), |{d >= hi}| <= budget
    if np.sum(measures[density >= lo]) <= budget * (1 + 1e-12):
        return density >= lo, lo
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if np.sum(measures[density >= mid]) <= budget * (1 + 1e-12):
            hi = mid
        else:
            lo = mid
    bits = density >= hi
    room = budget * (1 + 1e-12) - float(np.sum(measures[bits]))
    for c in np.nonzero((density >= lo) & ~bits)[0]:
        if measures[c] > room:
            break
        bits[c] = True
        room -= measures[c]
    return bits, hi


def solve_level_set(density: np.ndarray, mesh: Mesh, L: float, cell_integrals: np.ndarray | None = None) -> LevelSetResult:
    """Level-set design for a given per-cell density (mean of phi over each cell)."""
    if not 0 < L < 1:
        raise ConfigurationError("volume fraction L must lie in (0, 1)")
    dens = np.asarray(density, dtype=float).ravel()
    scale = float(np.max(np.abs(dens))) if dens.size else 0.0
    if scale <= 0.0:
        raise DegenerateDesignError("energy density vanishes identically; every set is optimal")
    measures = mesh.measures
    budget = L * mesh.volume
    bits, last = greedy_level_set(dens, measures, budget)
    order = np.argsort(-dens, kind="stable")
    threshold = float(dens[order[last]]) if last >= 0 else float(dens.max())
    dich_bits, dich_threshold = dichotomy_level_set(dens, measures, budget)
    ties = int(np.count_nonzero(np.abs(dens - threshold) <= _TIE * scale))
    indicator = SubsetIndicator(mesh, bits, L)
    integrals = dens * measures if cell_integrals is None else cell_integrals
    return LevelSetResult(
        threshold=threshold,
        set=indicator,
        fraction=indicator.fraction(),
        residual=abs(indicator.fraction() - L),
        density=dens,
        G=float(np.sum(integrals[bits])),
        dichotomy_threshold=dich_threshold,
        dichotomy_difference=int(np.count_nonzero(bits != dich_bits)),
        tie_cells=ties,
        unique=ties <= _NON_UNIQUE_SHARE * dens.size,
    )


def solve_problem1(data: InitialData, T: float, mesh: Mesh, L: float, q: int = 1) -> LevelSetResult:
    """Best set of volume fraction L for the observed energy of ``data`` over (0, T)."""
    if data.is_zero():
        raise DegenerateDesignError("initial data are zero; the energy density vanishes")
    integrals = energy_cell_integrals(data, T, mesh, q)
    return solve_level_set(integrals / mesh.measures, mesh, L, integrals)
