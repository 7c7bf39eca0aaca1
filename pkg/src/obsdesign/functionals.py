"""Spectral functionals: cross coefficients, energy densities, J and its variants,
observability constants and truncated HUM Gram matrices."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domains import EigenMode
from .errors import ConfigurationError, NumericalError
from .mesh import Mesh, ModeMassMatrix, cell_quadratic_form, field_values


class Equation(str, enum.Enum):
    WAVE = "wave"
    SCHRODINGER = "schrodinger"


@dataclass(frozen=True, eq=False)
class InitialData:
    """Truncated Fourier data: (a_j, b_j) for the wave equation, c_j for Schrodinger.

    The wave solution is sum_j (a_j e^{i lam_j t} + b_j e^{-i lam_j t}) phi_j and
    the Schrodinger one sum_j c_j e^{i lam_j^2 t} phi_j.
    """

    equation: Equation
    modes: tuple[EigenMode, ...]
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    c: np.ndarray | None = None

    def __post_init__(self):
        eq = Equation(self.equation)
        object.__setattr__(self, "equation", eq)
        object.__setattr__(self, "modes", tuple(self.modes))
        m = len(self.modes)
        if m < 1:
            raise ConfigurationError("initial data needs at least one mode")
        names = ("a", "b") if eq is Equation.WAVE else ("c",)
        for name in names:
            arr = getattr(self, name)
            if arr is None:
                raise ConfigurationError(f"{eq.value} data requires coefficients {name}")
            arr = np.asarray(arr, dtype=complex).ravel()
            if arr.size != m:
                raise ConfigurationError(f"coefficient {name} has {arr.size} entries for {m} modes")
            object.__setattr__(self, name, arr)

    @classmethod
    def wave(cls, modes, a, b) -> "InitialData":
        return cls(Equation.WAVE, tuple(modes), a=a, b=b)

    @classmethod
    def schrodinger(cls, modes, c) -> "InitialData":
        return cls(Equation.SCHRODINGER, tuple(modes), c=c)

    @classmethod
    def from_wave_state(cls, modes, y0, y1) -> "InitialData":
        """Data of y(0) = sum y0_j phi_j, y_t(0) = sum y1_j phi_j."""
        lam = np.array([m.lam for m in modes])
        y0 = np.asarray(y0, dtype=complex)
        y1 = np.asarray(y1, dtype=complex)
        return cls.wave(modes, 0.5 * (y0 - 1j * y1 / lam), 0.5 * (y0 + 1j * y1 / lam))

    @property
    def lams(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes])

    def is_zero(self) -> bool:
        arrays = (self.a, self.b) if self.equation is Equation.WAVE else (self.c,)
        return all(not np.any(arr) for arr in arrays)


@dataclass(frozen=True, eq=False)
class CrossCoefficients:
    matrix: np.ndarray
    T: float
    equation: Equation


def _sinc_factor(delta: np.ndarray, T: float) -> np.ndarray:
    """2 sin(delta T / 2) / delta, continuous at 0 (series below 1e-6)."""
    small = np.abs(delta) < 1e-6
    safe = np.where(small, 1.0, delta)
    exact = 2.0 * np.sin(0.5 * safe * T) / safe
    series = T - delta * delta * T**3 / 24.0
    return np.where(small, series, exact)


def cross_coefficients(data: InitialData, T: float) -> CrossCoefficients:
    """alpha_jk = integral over (0, T) of the time factors of the velocity field.

    Wave: u_j(t) = a_j e^{i lam_j t} - b_j e^{-i lam_j t} and alpha_jk = int u_j conj(u_k).
    Schrodinger: alpha_jk = int c_j conj(c_k) e^{i (lam_j^2 - lam_k^2) t}.
    """
    if not T > 0:
        raise ConfigurationError("time horizon T must be positive")
    lam = data.lams
    if data.equation is Equation.WAVE:
        a, b = data.a, data.b
        diff = np.subtract.outer(lam, lam)
        diff = np.where(np.abs(diff) < 1e-12, 0.0, diff)
        total = np.add.outer(lam, lam)
        s_diff, s_tot = _sinc_factor(diff, T), _sinc_factor(total, T)
        ph_diff, ph_tot = np.exp(0.5j * diff * T), np.exp(0.5j * total * T)
        alpha = (
            s_diff * ph_diff * np.outer(a, a.conj())
            + s_diff * ph_diff.conj() * np.outer(b, b.conj())
            - s_tot * ph_tot * np.outer(a, b.conj())
            - s_tot * ph_tot.conj() * np.outer(b, a.conj())
        )
    else:
        c = data.c
        diff = np.subtract.outer(lam * lam, lam * lam)
        diff = np.where(np.abs(diff) < 1e-12, 0.0, diff)
        alpha = _sinc_factor(diff, T) * np.exp(0.5j * diff * T) * np.outer(c, c.conj())
    alpha = 0.5 * (alpha + alpha.conj().T)
    return CrossCoefficients(alpha, float(T), data.equation)


def _energy_weights(data: InitialData, T: float) -> np.ndarray:
    """Real symmetric matrix K with phi(x) = sum_jk K_jk phi_j(x) phi_k(x)."""
    alpha = cross_coefficients(data, T).matrix
    lam = data.lams
    scale = lam if data.equation is Equation.WAVE else lam * lam
    return np.real(alpha) * np.outer(scale, scale)


def time_energy_density(data: InitialData, T: float, points) -> np.ndarray:
    """phi(x) = int_0^T |d_t y(t, x)|^2 dt (wave) or its Schrodinger analogue."""
    k = _energy_weights(data, T)
    pts = np.asarray(points, dtype=float)
    basis = np.stack([m.eval(pts) for m in data.modes], axis=-1)
    val = np.einsum("...j,jk,...k->...", basis, k, basis)
    return np.maximum(val, 0.0)


def energy_cell_integrals(data: InitialData, T: float, mesh: Mesh, q: int = 1) -> np.ndarray:
    """Integral of phi over every cell."""
    return np.maximum(cell_quadratic_form(mesh, data.modes, _energy_weights(data, T), q), 0.0)


def G_T(design, data: InitialData, T: float, mesh: Mesh, q: int = 1) -> float:
    return float(np.sum(field_values(design) * energy_cell_integrals(data, T, mesh, q)))


# ------------------------------------------------------------------ J family


@dataclass(frozen=True)
class JResult:
    value: float
    argmin: tuple[int, ...]
    position: int
    masses: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "argmin": list(self.argmin),
            "argmin_position": self.position,
            "masses": list(self.masses),
        }


def gamma_weights(modes: Sequence[EigenMode]) -> np.ndarray:
    """gamma_j = lam_j^2 / (1 + lam_j^2)."""
    lam_sq = np.array([m.lam for m in modes]) ** 2
    return lam_sq / (1.0 + lam_sq)


def _window(mass: ModeMassMatrix, n: int | None) -> ModeMassMatrix:
    if n is None:
        return mass
    if n < 1:
        raise ConfigurationError("window size must be >= 1")
    return mass.window(min(n, mass.n_modes))


def J(design, mass: ModeMassMatrix, n: int | None = None) -> JResult:
    """min over the first n rows of the mode masses (ties -> smallest row)."""
    return J_weighted(design, mass, None, n)


def J_weighted(design, mass: ModeMassMatrix, gamma=None, n: int | None = None) -> JResult:
    win = _window(mass, n)
    masses = win.row_masses(design)
    scored = masses if gamma is None else masses * np.asarray(gamma, dtype=float)[: win.n_modes]
    pos = int(np.argmin(scored))
    return JResult(float(scored[pos]), win.modes[pos].index, pos, tuple(float(m) for m in masses))


def randomized_constant(equation, design, mass: ModeMassMatrix, T: float, n: int | None = None) -> float:
    """(T/2) J for the wave equation, T J for Schrodinger."""
    eq = Equation(equation)
    value = J(design, mass, n).value
    return T * value if eq is Equation.SCHRODINGER else 0.5 * T * value


def eigenvalue_clusters(modes: Sequence[EigenMode], tol: float = 1e-9) -> list[list[int]]:
    """Group consecutive (lambda-sorted) modes whose frequencies differ by < tol."""
    order = sorted(range(len(modes)), key=lambda i: (modes[i].lam, modes[i].index))
    clusters: list[list[int]] = []
    for i in order:
        if clusters and abs(modes[i].lam - modes[clusters[-1][-1]].lam) < tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def asymptotic_constant_clustered(modes: Sequence[EigenMode], cross: np.ndarray) -> float:
    """min over eigenvalue clusters of the smallest eigenvalue of the cluster Gram matrix."""
    clusters = eigenvalue_clusters(modes)
    if not clusters:
        raise NumericalError("no eigenvalue clusters to evaluate")
    best = np.inf
    for cl in clusters:
        gram = cross[np.ix_(cl, cl)]
        low = gram[0, 0] if len(cl) == 1 else np.linalg.eigvalsh(gram)[0]
        best = min(best, float(low))
    return best


@dataclass(frozen=True, eq=False)
class HumGram:
    matrix: np.ndarray
    lambda_min: float
    lambda_max: float
    observable: bool

    @property
    def gamma_norm(self) -> float:
        """Norm estimate of the HUM control operator, 1 / lambda_min."""
        return 1.0 / self.lambda_min if self.observable else float("inf")


def _time_integral(freq: np.ndarray, T: float) -> np.ndarray:
    """int_0^T e^{i w t} dt."""
    return _sinc_factor(freq, T) * np.exp(0.5j * freq * T)


def hum_gram(modes: Sequence[EigenMode], T: float, cross: np.ndarray) -> HumGram:
    """Hermitian 2M x 2M matrix of the observed energy in the (A, B) coordinates.

    Its quadratic form is int_0^T int_omega |sum_k (A_k e^{i lam_k t} +
    B_k e^{-i lam_k t}) phi_k|^2 evaluated at the conjugated coefficients.
    """
    if not T > 0:
        raise ConfigurationError("time horizon T must be positive")
    lam = np.array([m.lam for m in modes])
    diff = np.subtract.outer(lam, lam)
    total = np.add.outer(lam, lam)
    w = np.asarray(cross, dtype=float)
    aa = w * _time_integral(diff, T)
    ab = w * _time_integral(total, T)
    ba = w * _time_integral(-total, T)
    bb = w * _time_integral(-diff, T)
    mat = np.block([[aa, ab], [ba, bb]])
    mat = 0.5 * (mat + mat.conj().T)
    ev = np.linalg.eigvalsh(mat)
    lo, hi = float(ev[0]), float(ev[-1])
    return HumGram(mat, lo, hi, lo > 1e-14)
