"""Exact solution of small zero-sum matrix games by a dense tableau simplex.

For payoff P (rows = minimiser's pure strategies, columns = maximiser's),
the value is max_mu min_i (P mu)_i = min_alpha max_k (P^T alpha)_k.  After a
shift making every entry >= 1, the minimiser's problem becomes the standard
form LP  max 1.y  s.t.  P^T y <= 1, y >= 0  whose slack basis is feasible, so
no phase one is needed.  The maximiser's strategy is read off the shadow
prices of the constraints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class GameSolution:
    value: float
    row_strategy: np.ndarray     # minimiser, on the simplex over rows
    column_strategy: np.ndarray  # maximiser, on the simplex over columns
    pivots: int


def solve_matrix_game(payoff: np.ndarray, max_pivots: int | None = None) -> GameSolution:
    p = np.asarray(payoff, dtype=float)
    n_rows, n_cols = p.shape
    shift = 1.0 - float(p.min())
    shifted = p + shift

    # tableau rows: one per column strategy (constraint), last row = objective
    tab = np.zeros((n_cols + 1, n_rows + n_cols + 1))
    tab[:n_cols, :n_rows] = shifted.T
    tab[:n_cols, n_rows:n_rows + n_cols] = np.eye(n_cols)
    tab[:n_cols, -1] = 1.0
    tab[-1, :n_rows] = -1.0
    basis = np.arange(n_rows, n_rows + n_cols)

    limit = max_pivots or 50 * (n_rows + n_cols) + 100
    pivots = 0
    bland = False
    while True:
        obj = tab[-1, :-1]
        if bland:
            candidates = np.nonzero(obj < -_EPS)[0]
            if candidates.size == 0:
                break
            enter = int(candidates[0])
        else:
            enter = int(np.argmin(obj))
            if obj[enter] >= -_EPS:
                break
        col = tab[:-1, enter]
        positive = col > _EPS
        if not np.any(positive):
            raise NumericalError("matrix game LP is unbounded (payoff not positive after shift)")
        ratios = np.full(n_cols, np.inf)
        ratios[positive] = tab[:-1, -1][positive] / col[positive]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + 1e-12 * max(1.0, best))[0]
        leave = int(ties[np.argmin(basis[ties])]) if bland else int(ties[0])
        # degenerate steps switch to Bland's rule to rule out cycling
        bland = bland or best <= _EPS
        piv = tab[leave] / tab[leave, enter]
        tab -= np.outer(tab[:, enter], piv)
        tab[leave] = piv
        basis[leave] = enter
        pivots += 1
        if pivots > limit:
            raise NumericalError(f"matrix game simplex exceeded {limit} pivots")

    y = np.zeros(n_rows + n_cols)
    y[basis] = tab[:-1, -1]
    y = np.maximum(y[:n_rows], 0.0)
    total = float(y.sum())
    if total <= 0:
        raise NumericalError("matrix game LP returned an empty strategy")
    duals = np.maximum(tab[-1, n_rows:n_rows + n_cols], 0.0)
    return GameSolution(
        value=1.0 / total - shift,
        row_strategy=y / total,
        column_strategy=duals / duals.sum(),
        pivots=pivots,
    )
