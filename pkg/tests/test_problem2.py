import math

import numpy as np
import pytest
from scipy.optimize import linprog

from obsdesign.domains import AxisFactor, DomainSpec, EigenMode, window_modes
from obsdesign.errors import ConfigurationError
from obsdesign.functionals import J, gamma_weights
from obsdesign.mesh import build_mesh, mode_mass
from obsdesign.problem2 import detect_stationarity, knapsack_fill, solve_problem2

INTERVAL = DomainSpec("Interval1D")
SQUARE = DomainSpec("Square2D")


def lp_value(mass, L):
    w = mass.dense()
    n, c = w.shape
    meas = mass.mesh.measures
    res = linprog(
        np.r_[np.zeros(c), -1.0],
        A_ub=np.hstack([-w, np.ones((n, 1))]),
        b_ub=np.zeros(n),
        A_eq=np.r_[meas, 0.0][None, :],
        b_eq=[L * meas.sum()],
        bounds=[(0, 1)] * c + [(None, None)],
        method="highs",
    )
    assert res.status == 0
    return -res.fun


@pytest.fixture(scope="module")
def interval_mesh():
    return build_mesh(INTERVAL, 1024)


def test_single_mode_analytic(interval_mesh):
    res = solve_problem2(mode_mass(interval_mesh, window_modes(INTERVAL, 1), 3), None, 0.5)
    assert res.value == pytest.approx(0.5 + 1 / math.pi, abs=1e-6)
    x = interval_mesh.centers[:, 0]
    target = ((x >= math.pi / 4) & (x <= 3 * math.pi / 4)).astype(float)
    assert np.sum(np.abs(res.field.values - target)) <= 2
    assert res.converged and res.gap <= 1e-6


def test_constant_basis_gives_L():
    mesh = build_mesh(INTERVAL, 64)
    flat = EigenMode((0,), 0.0, (AxisFactor("cosine", 0),))
    res = solve_problem2(mode_mass(mesh, [flat], 1), None, 0.3)
    assert res.value == pytest.approx(0.3, abs=1e-6)


@pytest.mark.parametrize("L", [0.2, 0.4, 0.6])
def test_square_matches_lp(L):
    mesh = build_mesh(SQUARE, 32)
    mass = mode_mass(mesh, window_modes(SQUARE, 2), 2)
    res = solve_problem2(mass, None, L)
    assert res.value == pytest.approx(lp_value(mass, L), abs=1e-5)
    assert abs(res.field.mass_defect()) <= 1e-10 * mesh.volume
    # the returned value is the min of the row masses of the field
    assert J(res.field, mass).value == pytest.approx(res.value, abs=1e-12)
    assert res.value <= res.upper_bound + 1e-12


def test_alpha_on_simplex(interval_mesh):
    res = solve_problem2(mode_mass(interval_mesh, window_modes(INTERVAL, 4), 1), None, 0.3)
    assert np.all(res.alpha >= 0)
    assert res.alpha.sum() == pytest.approx(1.0, abs=1e-12)


def test_value_monotone_in_N(interval_mesh):
    mass = mode_mass(interval_mesh, window_modes(INTERVAL, 6), 1)
    values = [solve_problem2(mass, n, 0.4).value for n in range(1, 7)]
    assert all(b <= a + 1e-10 for a, b in zip(values, values[1:]))


def test_fractional_cells_in_tie_layer():
    mesh = build_mesh(SQUARE, 32)
    res = solve_problem2(mode_mass(mesh, window_modes(SQUARE, 2), 1), None, 0.3, symmetric=False)
    v = res.field.values
    fractional = int(np.count_nonzero((v > 1e-9) & (v < 1 - 1e-9)))
    assert fractional <= res.tie_cells + 1


def test_half_square_lower_bound():
    mesh = build_mesh(SQUARE, 32)
    res = solve_problem2(mode_mass(mesh, window_modes(SQUARE, 1), 2), None, 0.5)
    assert res.value >= 0.5 - 1e-6


def test_weighted_equals_gamma_scaled(interval_mesh):
    modes = window_modes(INTERVAL, 3)
    mass = mode_mass(interval_mesh, modes, 1)
    res = solve_problem2(mass, None, 0.5, gamma_weights(modes))
    masses = np.array(J(res.field, mass).masses)
    assert np.min(masses * gamma_weights(modes)) == pytest.approx(res.value, abs=1e-12)


def test_validation(interval_mesh):
    mass = mode_mass(interval_mesh, window_modes(INTERVAL, 2), 1)
    with pytest.raises(ConfigurationError):
        solve_problem2(mass, None, 0.0)
    with pytest.raises(ConfigurationError):
        solve_problem2(mass, None, 0.5, tol=0.0)
    with pytest.raises(ConfigurationError):
        solve_problem2(mass, None, 0.5, weights=[1.0, -1.0])


def test_non_converged_flag(interval_mesh):
    mass = mode_mass(interval_mesh, window_modes(INTERVAL, 8), 1)
    res = solve_problem2(mass, None, 0.3, tol=1e-14, max_iter=2, eg_steps=1)
    assert res.gap >= 0
    assert res.converged == (res.gap <= 1e-14)


def test_knapsack_fill():
    dens = np.array([1.0, 3.0, 2.0, 3.0])
    meas = np.ones(4)
    assert np.allclose(knapsack_fill(dens, meas, 2.5), [0.0, 1.0, 0.5, 1.0])
    assert np.allclose(knapsack_fill(dens, meas, 1.0), [0.0, 1.0, 0.0, 0.0])  # tie: lowest id


def test_weighted_stationarity_and_spillover():
    mesh = build_mesh(INTERVAL, 1024)
    full = window_modes(INTERVAL, 6)
    mass = mode_mass(mesh, full, 1)
    report = detect_stationarity(mass.window, 0.9, gamma_weights, 6)
    assert report.n0 is not None and report.certified
    tail = report.values[report.n0 - 1:]
    assert max(tail) - min(tail) <= 1e-6
    plain = detect_stationarity(mass.window, 0.3, None, 5)
    assert all(a - b > 1e-8 for a, b in zip(plain.values, plain.values[1:]))


def test_stationarity_needs_two_windows():
    mesh = build_mesh(INTERVAL, 64)
    mass = mode_mass(mesh, window_modes(INTERVAL, 2), 1)
    with pytest.raises(ConfigurationError):
        detect_stationarity(mass.window, 0.9, gamma_weights, 1)
