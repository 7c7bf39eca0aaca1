import math

import numpy as np
import pytest

from obsdesign.domains import DomainSpec, window_modes
from obsdesign.errors import ConfigurationError, DegenerateDesignError
from obsdesign.functionals import InitialData
from obsdesign.mesh import build_mesh
from obsdesign.problem1 import dichotomy_level_set, greedy_level_set, solve_level_set, solve_problem1

INTERVAL = DomainSpec("Interval1D")
SQUARE = DomainSpec("Square2D")


def single_mode():
    return InitialData.wave(window_modes(INTERVAL, 1), [0.5], [0.5])


def test_single_mode_level_set():
    mesh = build_mesh(INTERVAL, 1024)
    res = solve_problem1(single_mode(), 2 * math.pi, mesh, 0.5)
    x = mesh.centers[:, 0]
    analytic = (x >= math.pi / 4) & (x <= 3 * math.pi / 4)
    assert np.count_nonzero(res.set.bits != analytic) <= 1
    assert res.residual <= 1 / 1024
    assert res.threshold == pytest.approx(1.0, abs=1e-2)  # phi = 2 sin^2 x at the cut
    assert res.dichotomy_difference == 0
    assert res.unique


def test_threshold_separates_cells(rng):
    modes = window_modes(SQUARE, 3)
    data = InitialData.wave(modes, rng.normal(size=len(modes)), rng.normal(size=len(modes)))
    mesh = build_mesh(SQUARE, 40)
    res = solve_problem1(data, 3.0, mesh, 0.35)
    d = res.density
    assert np.all(d[res.set.bits] >= res.threshold - 1e-12)
    assert np.all(d[~res.set.bits] <= res.threshold + 1e-12)


def test_large_L_takes_positive_cells():
    mesh = build_mesh(INTERVAL, 200)
    res = solve_problem1(single_mode(), 2 * math.pi, mesh, 0.999)
    # every cell has positive density; all but the last partial cell are taken
    assert np.count_nonzero(~res.set.bits) <= 1


@pytest.mark.parametrize("L", [0.1, 0.37, 0.5, 0.8])
def test_greedy_and_dichotomy_agree(rng, L):
    dens = rng.random(500)
    meas = rng.uniform(0.5, 1.5, size=500)
    budget = L * meas.sum()
    g, _ = greedy_level_set(dens, meas, budget)
    b, _ = dichotomy_level_set(dens, meas, budget)
    assert np.array_equal(g, b)


def test_greedy_and_dichotomy_agree_with_ties():
    dens = np.repeat([3.0, 2.0, 1.0], 10)
    meas = np.ones(30)
    g, _ = greedy_level_set(dens, meas, 15.0)
    b, _ = dichotomy_level_set(dens, meas, 15.0)
    assert np.array_equal(g, b)
    assert np.array_equal(np.nonzero(g)[0], np.arange(15))  # lowest ids in the tie layer


def test_zero_data_is_degenerate():
    mesh = build_mesh(INTERVAL, 50)
    data = InitialData.wave(window_modes(INTERVAL, 3), np.zeros(3), np.zeros(3))
    with pytest.raises(DegenerateDesignError):
        solve_problem1(data, 2.0, mesh, 0.5)
    with pytest.raises(DegenerateDesignError):
        solve_level_set(np.zeros(50), mesh, 0.5)


def test_bad_fraction():
    mesh = build_mesh(INTERVAL, 50)
    with pytest.raises(ConfigurationError):
        solve_problem1(single_mode(), 2.0, mesh, 1.0)


def test_symmetric_data_symmetric_set():
    # only odd modes in x1: the density is symmetric under x1 -> pi - x1
    modes = [m for m in window_modes(SQUARE, 4) if m.index[0] % 2 == 1]
    rng = np.random.default_rng(5)
    data = InitialData.wave(modes, rng.normal(size=len(modes)), rng.normal(size=len(modes)))
    mesh = build_mesh(SQUARE, 48)
    res = solve_problem1(data, 2.5, mesh, 0.5)
    grid = mesh.reshape(res.set.bits)
    assert np.count_nonzero(grid != grid[::-1, :]) <= res.tie_cells


def test_flat_density_is_not_unique():
    mesh = build_mesh(INTERVAL, 100)
    dens = np.ones(100)
    dens[:10] = 2.0
    res = solve_level_set(dens, mesh, 0.5)
    assert not res.unique
    assert res.tie_cells == 90
    assert res.set.bits[:50].all() and not res.set.bits[50:].any()


def test_to_dict_lists_cells():
    mesh = build_mesh(INTERVAL, 16)
    res = solve_problem1(single_mode(), 2 * math.pi, mesh, 0.5)
    out = res.to_dict()
    assert out["set_cells"] == [int(c) for c in np.nonzero(res.set.bits)[0]]
    assert out["G_T"] == pytest.approx(res.G)
