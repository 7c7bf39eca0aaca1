"""Truncated uniform design: max over relaxed densities of min_j gamma_j (mass of mode j).

The saddle problem  min_{alpha in simplex} max_{a} sum_j alpha_j gamma_j <a, w_j>
is solved on the dual side.  For fixed alpha the inner max is a fractional
knapsack (sort cells by weighted density, fill to the mass budget).  The outer
minimisation starts with exponentiated-gradient steps and is finished by a
cutting-plane loop: every inner fill is a column, and the exact matrix game
over the collected columns yields a feasible mixed design (lower bound) and
the next dual query point.  The dual fills give the upper bound, so the
reported gap is a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domains import COSINE, FOURIER, SINE, DomainKind
from .errors import ConfigurationError
from .matrix_game import solve_matrix_game
from .mesh import DensityField, Mesh, ModeMassMatrix


@dataclass(frozen=True, eq=False)
class SaddleResult:
    field: DensityField
    alpha: np.ndarray
    value: float
    upper_bound: float
    gap: float
    iterations: int
    gap_log: tuple[float, ...]
    converged: bool
    modes: tuple = ()
    tie_cells: int = 0

    @property
    def bang_bang_fraction(self) -> float:
        return self.field.bang_bang_fraction()

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "upper_bound": self.upper_bound,
            "gap": self.gap,
            "alpha": [float(x) for x in self.alpha],
            "modes": [list(m.index) for m in self.modes],
            "iterations": self.iterations,
            "converged": self.converged,
            "bang_bang_fraction": self.bang_bang_fraction,
            "tie_cells": self.tie_cells,
        }


def knapsack_fill(density: np.ndarray, measures: np.ndarray, budget: float) -> np.ndarray:
    """Maximiser of sum_c a_c density_c meas_c over a in [0,1], sum a meas = budget.

    Cells enter by decreasing density, ties by lowest id; one cell may be fractional.
    """
    order = np.argsort(-density, kind="stable")
    cum = np.cumsum(measures[order])
    full = int(np.searchsorted(cum, budget * (1 + 1e-14), side="right"))
    a = np.zeros_like(measures)
    a[order[:full]] = 1.0
    if full < len(order):
        done = cum[full - 1] if full else 0.0
        a[order[full]] = min(max((budget - done) / measures[order[full]], 0.0), 1.0)
    return a


class _Saddle:
    """Inner problem, optionally restricted to ``free`` cells with the rest fixed."""

    def __init__(self, mass: ModeMassMatrix, L: float, gamma: np.ndarray, fixed: np.ndarray | None = None,
                 free: np.ndarray | None = None):
        self.mass = mass
        self.gamma = gamma
        self.measures = mass.mesh.measures
        self.budget = L * float(np.sum(self.measures))
        self.fixed = np.zeros_like(self.measures) if fixed is None else fixed
        self.free = np.ones(len(self.measures), dtype=bool) if free is None else free
        self.free_budget = self.budget - float(np.sum(self.fixed * self.measures))

    def fill(self, alpha: np.ndarray) -> np.ndarray:
        dens = self.mass.combine(alpha * self.gamma) / self.measures
        a = self.fixed.copy()
        a[self.free] = knapsack_fill(dens[self.free], self.measures[self.free], self.free_budget)
        return a

    def column(self, a: np.ndarray) -> np.ndarray:
        return self.gamma * self.mass.row_masses(a)

    def value(self, a: np.ndarray) -> float:
        return float(np.min(self.column(a)))


@dataclass
class _Run:
    best_ub: float
    best_alpha: np.ndarray
    dual: np.ndarray
    primal: np.ndarray
    lower: float
    iterations: int
    gap_log: list


def _cutting_plane(problem: _Saddle, n: int, tol: float, max_iter: int, eg_steps: int) -> _Run:
    alphas: list[np.ndarray] = []
    columns: list[np.ndarray] = []
    best = [np.inf, None]

    def query(alpha):
        col = problem.column(problem.fill(alpha))
        alphas.append(alpha.copy())
        columns.append(col)
        ub = float(alpha @ col)
        if ub < best[0]:
            best[:] = [ub, alpha.copy()]
        return col

    # exponentiated-gradient warm start with averaged iterates
    alpha = np.full(n, 1.0 / n)
    avg = np.zeros(n)
    for t in range(1, eg_steps + 1):
        col = query(alpha)
        avg += (alpha - avg) / t
        eta = math.sqrt(2.0 * math.log(max(n, 2)) / t) / max(float(np.ptp(col)), 1e-12)
        alpha = alpha * np.exp(-eta * (col - col.min()))
        alpha /= alpha.sum()
    query(avg)

    gap_log: list[float] = []
    iterations = eg_steps + 1
    while True:
        game = solve_matrix_game(np.array(columns).T)
        gap_log.append(best[0] - game.value)
        if best[0] - game.value <= tol or iterations >= max_iter:
            break
        query(game.row_strategy)
        iterations += 1

    primal = np.zeros_like(problem.measures)
    for k in np.nonzero(game.column_strategy > 1e-14)[0]:
        primal += game.column_strategy[k] * problem.fill(alphas[k])
    return _Run(best[0], best[1], game.row_strategy, primal, game.value, iterations, gap_log)


def _purify(problem: _Saddle, run: _Run, n: int, tol: float, max_iter: int) -> tuple[np.ndarray, int] | None:
    """Re-solve with every cell off the dual threshold fixed to 0 or 1.

    Complementary slackness leaves only cells whose weighted density equals
    the threshold at the optimal dual free; the widening band absorbs the
    inexactness of the computed dual.
    """
    dens = problem.mass.combine(run.dual * problem.gamma) / problem.measures
    order = np.argsort(-dens, kind="stable")
    cum = np.cumsum(problem.measures[order])
    cut = min(int(np.searchsorted(cum, problem.budget, side="left")), len(order) - 1)
    tau = dens[order[cut]]
    scale = max(abs(tau), float(np.max(np.abs(dens))) * 1e-3, 1e-300)
    for rel in (1e-10, 1e-8, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2):
        band = rel * scale
        free = np.abs(dens - tau) <= band
        fixed = (dens > tau + band).astype(float)
        reduced = _Saddle(problem.mass, 0.0, problem.gamma, fixed, free)
        reduced.budget = problem.budget
        reduced.free_budget = problem.budget - float(np.sum(fixed * problem.measures))
        if not 0 <= reduced.free_budget <= float(np.sum(problem.measures[free])) * (1 + 1e-12):
            continue
        sub = _cutting_plane(reduced, n, tol * 1e-2, max_iter, eg_steps=2)
        if problem.value(sub.primal) >= run.best_ub - tol:
            return sub.primal, int(np.count_nonzero(free))
    return None


def _symmetry_images(mesh: Mesh, modes) -> list[Callable[[np.ndarray], np.ndarray]] | None:
    """Mesh maps under which the windowed J is invariant (None = ring averaging on the disk)."""
    dom = mesh.domain
    if dom.kind is DomainKind.DISK:
        return None
    fams = [m.factors for m in modes]
    images: list[Callable] = [lambda x: x]
    for d in range(dom.dim):
        if all(f[d].family in (SINE, COSINE, FOURIER) for f in fams):
            images += [(lambda x, d=d, g=g: np.flip(g(x), axis=d)) for g in images]
    if dom.dim == 2 and mesh.shape[0] == mesh.shape[1]:
        same_family = all(f[0].family == f[1].family for f in fams)
        idx = {m.index for m in modes}
        if same_family and all((m.index[1], m.index[0]) in idx for m in modes):
            images += [(lambda x, g=g: g(x).T) for g in images]
    return images


def symmetrize(values: np.ndarray, mesh: Mesh, modes) -> np.ndarray:
    """Average a design over mesh symmetries that preserve the windowed criterion.

    J is concave and invariant under each map, so the average is never worse.
    On the disk the ring average keeps every j = 0 mass and replaces each
    (m=1, m=2) pair of masses by their mean.
    """
    grid = mesh.reshape(values)
    images = _symmetry_images(mesh, modes)
    if images is None:
        avg = np.average(grid, axis=1, weights=mesh.axes[1].measures)
        return np.repeat(avg[:, None], grid.shape[1], axis=1).ravel()
    return np.mean([g(grid) for g in images], axis=0).ravel()


def default_max_iter(n_modes: int, n_cells: int) -> int:
    return int(50 * n_modes * math.log(max(n_cells, 2)))


def solve_problem2(
    mass: ModeMassMatrix,
    N: int | None,
    L: float,
    weights: Sequence[float] | None = None,
    tol: float = 1e-6,
    max_iter: int | None = None,
    symmetric: bool = True,
    eg_steps: int | None = None,
) -> SaddleResult:
    """Saddle point of the (optionally gamma-weighted) truncated criterion.

    ``N`` selects the first N rows of ``mass`` (None = all rows).
    """
    if not 0 < L < 1:
        raise ConfigurationError("volume fraction L must lie in (0, 1)")
    if not tol > 0:
        raise ConfigurationError("tolerance must be positive")
    win = mass if N is None else mass.window(N)
    n = win.n_modes
    gamma = np.ones(n) if weights is None else np.asarray(weights, dtype=float)[:n]
    if np.any(gamma <= 0):
        raise ConfigurationError("weights must be positive")
    problem = _Saddle(win, L, gamma)
    max_iter = max_iter or default_max_iter(n, win.mesh.n_cells)
    steps = eg_steps if eg_steps is not None else min(20 + 2 * n, max_iter)
    run = _cutting_plane(problem, n, tol, max_iter, steps)

    a, tie_cells = run.primal, win.mesh.n_cells
    pure = _purify(problem, run, n, tol, max_iter) if run.best_ub - run.lower <= tol else None
    if pure is not None and problem.value(pure[0]) >= problem.value(a) - tol:
        a, tie_cells = pure
    a = np.clip(a, 0.0, 1.0)
    value = problem.value(a)
    if symmetric:
        sym = symmetrize(a, win.mesh, win.modes)
        sym_value = problem.value(sym)
        if sym_value >= value - 1e-12:
            a, value = sym, sym_value
    gap = run.best_ub - value
    return SaddleResult(
        field=DensityField(win.mesh, a, L),
        alpha=run.best_alpha,
        value=value,
        upper_bound=run.best_ub,
        gap=gap,
        iterations=run.iterations,
        gap_log=tuple(run.gap_log),
        converged=gap <= tol,
        modes=win.modes,
        tie_cells=tie_cells,
    )


# ------------------------------------------------------- stationarity sweep


@dataclass(frozen=True, eq=False)
class StationarityReport:
    n0: int | None
    certified: bool
    values: tuple[float, ...]
    differences: tuple[float, ...]
    results: tuple[SaddleResult, ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        return {
            "N0": self.n0,
            "certified": self.certified,
            "values": list(self.values),
            "symmetric_differences": list(self.differences),
        }


def field_difference(a: DensityField, b: DensityField) -> float:
    """Mass of the symmetric difference, sum_c |a_c - b_c| meas_c."""
    return float(np.sum(np.abs(a.values - b.values) * a.mesh.measures))


def detect_stationarity(
    mass_for: Callable[[int], ModeMassMatrix],
    L: float,
    gamma_for: Callable[[Sequence], np.ndarray] | None,
    n_max: int,
    value_tol: float = 1e-6,
    set_tol: float = 1e-3,
    margin: float = 1e-6,
    solver_tol: float = 1e-9,
) -> StationarityReport:
    """Solve windows 1..n_max and find the first N0 from which value and field stay put.

    ``mass_for(N)`` returns the mass matrix of window N; ``gamma_for(modes)``
    returns the weights (None = unweighted).  Certification checks that every
    mode of the largest window outside window N0 clears the value by ``margin``.
    """
    if n_max < 2:
        raise ConfigurationError("stationarity sweep needs n_max >= 2")
    results = []
    for n in range(1, n_max + 1):
        mm = mass_for(n)
        g = None if gamma_for is None else gamma_for(mm.modes)
        results.append(solve_problem2(mm, None, L, g, tol=solver_tol))
    values = tuple(r.value for r in results)
    volume = results[0].field.mesh.domain.volume
    last = results[-1]
    diffs = tuple(field_difference(r.field, last.field) for r in results)
    n0 = None
    for start in range(n_max, 0, -1):
        ref = results[start - 1]
        stable = all(
            abs(results[k].value - ref.value) <= value_tol
            and field_difference(results[k].field, ref.field) <= set_tol * volume
            for k in range(start - 1, n_max)
        )
        if not stable:
            break
        n0 = start
    if n0 == n_max:
        n0 = None  # a single window is no plateau
    certified = False
    if n0 is not None:
        big = mass_for(n_max)
        inside = {m.index for m in results[n0 - 1].modes}
        rows = [i for i, m in enumerate(big.modes) if m.index not in inside]
        g_big = np.ones(big.n_modes) if gamma_for is None else np.asarray(gamma_for(big.modes))
        masses = big.row_masses(results[n0 - 1].field)
        ref_value = results[n0 - 1].value
        certified = all(g_big[i] * masses[i] >= ref_value + margin for i in rows)
    return StationarityReport(n0, certified, values, diffs, tuple(results))
