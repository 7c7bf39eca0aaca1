import numpy as np
import pytest
from scipy.optimize import linprog

from obsdesign.matrix_game import solve_matrix_game


def lp_value(p):
    """max_mu min_i (P mu)_i by HiGHS: variables (mu, v), maximise v."""
    n_rows, n_cols = p.shape
    c = np.zeros(n_cols + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-p, np.ones((n_rows, 1))])
    a_eq = np.hstack([np.ones((1, n_cols)), np.zeros((1, 1))])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n_rows), A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * n_cols + [(None, None)], method="highs")
    assert res.status == 0
    return -res.fun


@pytest.mark.parametrize("shape", [(1, 1), (2, 3), (5, 5), (8, 40), (30, 12)])
def test_value_matches_highs(rng, shape):
    for _ in range(5):
        p = rng.normal(size=shape)
        sol = solve_matrix_game(p)
        assert sol.value == pytest.approx(lp_value(p), abs=1e-9)
        assert sol.row_strategy.min() >= -1e-12 and sol.column_strategy.min() >= -1e-12
        assert sol.row_strategy.sum() == pytest.approx(1.0, abs=1e-12)
        assert sol.column_strategy.sum() == pytest.approx(1.0, abs=1e-12)
        # both strategies certify the value
        assert np.min(p @ sol.column_strategy) == pytest.approx(sol.value, abs=1e-9)
        assert np.max(sol.row_strategy @ p) == pytest.approx(sol.value, abs=1e-9)


def test_matching_pennies():
    sol = solve_matrix_game(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert sol.value == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(sol.column_strategy, [0.5, 0.5])


def test_degenerate_ties(rng):
    base = rng.integers(0, 3, size=(6, 6)).astype(float)
    p = np.vstack([base, base])  # duplicated rows make the tableau degenerate
    assert solve_matrix_game(p).value == pytest.approx(lp_value(p), abs=1e-9)
