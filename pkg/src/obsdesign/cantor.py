"""A Cantor-type set C in [-pi, pi] carrying a piecewise-linear even function f >= 0
whose cosine coefficients a_n = int f(x) cos(nx) dx are all positive.

f is a sum of triangles: one of height b_0 over [-alpha pi, alpha pi] and, for
k = 1..K, one of height b_k over each of +-I_k.  The heights shrink fast
enough that at every n some peak dominates all later ones.  Every angle is
reduced modulo 2 pi in exact rational arithmetic before taking a cosine, so
the sign certificate does not depend on the size of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .domains import DomainKind, DomainSpec, window_modes
from .errors import CertificationError, ConfigurationError
from .functionals import InitialData
from .mesh import Mesh, SubsetIndicator

SAFETY = 0.9


@dataclass(frozen=True)
class CantorParams:
    p: int = 1
    q: int = 5
    K: int = 8
    b0: float = 1.0

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ConfigurationError("p and q must be positive integers")
        if math.gcd(self.p, self.q) != 1:
            raise ConfigurationError(f"p={self.p} and q={self.q} are not coprime")
        if not 3 * self.p < self.q:
            raise ConfigurationError(f"alpha = {self.p}/{self.q} must be below 1/3")
        if (self.p + self.q) % 2:
            raise ConfigurationError(f"p + q = {self.p + self.q} must be even")
        if self.K < 1:
            raise ConfigurationError("K must be >= 1")
        if not self.b0 > 0:
            raise ConfigurationError("b0 must be positive")

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.p, self.q)


def _one_minus_cos_pi(x: Fraction) -> float:
    """1 - cos(pi x) = 2 sin^2(pi x / 2), with x reduced modulo 2 first."""
    x = x % 2
    return 2.0 * math.sin(0.5 * math.pi * float(x)) ** 2


def _cos_pi(x: Fraction) -> float:
    x = x % 2
    return math.cos(math.pi * float(x))


@dataclass(frozen=True, eq=False)
class CantorSet:
    params: CantorParams
    centers: tuple[Fraction, ...]       # s_k / pi, k = 0..K (s_0 = 0)
    half_widths: tuple[Fraction, ...]   # half-width / pi; entry 0 is the base alpha
    heights: tuple[float, ...]          # b_0..b_K
    sigmas: tuple[float, ...]           # sigma_0..sigma_K

    @property
    def K(self) -> int:
        return self.params.K

    def intervals(self) -> list[tuple[float, float]]:
        """C intersected with [0, pi]: [0, alpha pi] then I_1..I_K."""
        out = [(0.0, math.pi * float(self.half_widths[0]))]
        for c, h in zip(self.centers[1:], self.half_widths[1:]):
            out.append((math.pi * float(c - h), math.pi * float(c + h)))
        return out

    def measure_half(self) -> float:
        """|C intersected with [0, pi]|."""
        return math.pi * float(self.half_widths[0] + 2 * sum(self.half_widths[1:], Fraction(0)))

    def disjoint(self) -> bool:
        ivs = self.intervals()
        return all(a[1] < b[0] for a, b in zip(ivs, ivs[1:])) and ivs[-1][1] < math.pi

    def f(self, x) -> np.ndarray:
        """The piecewise-linear function, evaluated on [-pi, pi] (even, 2 pi periodic)."""
        x = np.abs(np.mod(np.asarray(x, dtype=float) + math.pi, 2 * math.pi) - math.pi)
        out = np.zeros_like(x)
        for c, h, b in zip(self.centers, self.half_widths, self.heights):
            cc, hh = math.pi * float(c), math.pi * float(h)
            out += b * np.clip(1.0 - np.abs(x - cc) / hh, 0.0, None)
        return out

    def to_dict(self) -> dict:
        return {
            "p": self.params.p,
            "q": self.params.q,
            "K": self.K,
            "alpha": float(self.params.alpha),
            "centers": [math.pi * float(c) for c in self.centers],
            "half_widths": [math.pi * float(h) for h in self.half_widths],
            "intervals": [list(iv) for iv in self.intervals()],
            "heights": list(self.heights),
            "sigmas": list(self.sigmas),
            "measure_in_half_period": self.measure_half(),
            "disjoint": self.disjoint(),
        }


def _sigmas(params: CantorParams) -> list[float]:
    p, q = params.p, params.q
    alpha = params.alpha
    out = [min(_one_minus_cos_pi(n * alpha) for n in range(1, 2 * q))]
    for m in range(1, params.K + 1):
        step = Fraction(p * (q - p) ** m, q * 2 ** (m - 1))
        # r in multiples of q make the angle a multiple of 2 pi; they are excluded
        out.append(min(_one_minus_cos_pi(r * step) for r in range(1, q)))
    return out


def build_cantor(params: CantorParams) -> CantorSet:
    alpha = params.alpha
    centers = [Fraction(0)] + [1 - (alpha + 1) ** k / 2**k for k in range(1, params.K + 1)]
    halves = [alpha] + [alpha * (1 - alpha) ** k / 2**k for k in range(1, params.K + 1)]
    sig = _sigmas(params)
    if min(sig) <= 0:
        raise CertificationError("a sigma minimum vanished", offending=int(np.argmin(sig)))
    ratio = float((1 - alpha) / 2)
    heights = [params.b0]
    for k in range(1, params.K + 1):
        bound = ratio**k * 0.5**k * sig[0] * params.b0 / 8
        for m in range(1, k):
            bound = min(bound, ratio ** (k - m) * 0.5 ** (k - m + 2) * heights[m] * sig[m])
        heights.append(SAFETY * bound)
    cs = CantorSet(params, tuple(centers), tuple(halves), tuple(heights), tuple(sig))
    if not cs.disjoint():
        raise CertificationError("Cantor intervals overlap", offending=0)
    return cs


def triangle_cosine_coefficient(a: float, ell: float, b: float, n: int) -> float:
    """int g(x) cos(nx) dx for the triangle g of height b over [a - ell/2, a + ell/2]."""
    if not ell > 0 or not b > 0:
        raise ConfigurationError("triangle needs positive width and height")
    if n == 0:
        return 0.5 * b * ell
    return 4 * b / (ell * n * n) * math.cos(n * a) * (1 - math.cos(0.5 * n * ell))


@dataclass(frozen=True, eq=False)
class CantorCoefficients:
    n: np.ndarray
    a: np.ndarray
    partial_sums: np.ndarray
    truncation_bound: np.ndarray  # bound on the change in a_n from peaks beyond K

    def rows(self):
        return zip(self.n.tolist(), self.a.tolist(), self.partial_sums.tolist())


def _coefficient(cs: CantorSet, n: int) -> float:
    """a_n = int_{-pi}^{pi} f cos(nx) dx, angles reduced exactly."""
    total = 0.0
    for k, (c, h, b) in enumerate(zip(cs.centers, cs.half_widths, cs.heights)):
        width = 2 * h  # ell / pi
        scale = 4 * b / (math.pi * float(width) * n * n)
        term = scale * _cos_pi(n * c) * _one_minus_cos_pi(n * h)
        total += term if k == 0 else 2 * term
    return total


def cantor_coefficients(cs: CantorSet, n_max: int, certify: bool = True) -> CantorCoefficients:
    """Cosine coefficients a_1..a_{n_max}; raises CertificationError at the first a_n <= 0."""
    if n_max < 1:
        raise ConfigurationError("n_max must be >= 1")
    n = np.arange(1, n_max + 1)
    a = np.array([_coefficient(cs, int(k)) for k in n])
    if certify:
        bad = np.nonzero(a <= 0)[0]
        if bad.size:
            first = int(n[bad[0]])
            raise CertificationError(f"cosine coefficient a_{first} = {a[bad[0]]:.3e} is not positive", offending=first)
    alpha = float(cs.params.alpha)
    tail = cs.sigmas[0] * cs.params.b0 / (2 * alpha * math.pi * n.astype(float) ** 2) * 0.5**cs.K
    return CantorCoefficients(n, a, np.cumsum(a), tail)


def quadrature_coefficient(cs: CantorSet, n: int, points: int = 32) -> float:
    """int f cos(nx) over [-pi, pi] by composite Gauss-Legendre on every linear piece."""
    nodes, weights = np.polynomial.legendre.leggauss(points)
    total = 0.0
    for k, (c, h) in enumerate(zip(cs.centers, cs.half_widths)):
        centres = [math.pi * float(c)] if k == 0 else [math.pi * float(c), -math.pi * float(c)]
        hw = math.pi * float(h)
        for cc in centres:
            for lo, hi in ((cc - hw, cc), (cc, cc + hw)):
                panels = max(1, int(math.ceil((hi - lo) * max(n, 1) / 2.0)))
                edges = np.linspace(lo, hi, panels + 1)
                mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
                half = 0.5 * (edges[1:] - edges[:-1])[:, None]
                x = mid + half * nodes[None, :]
                total += float(np.sum(half * weights[None, :] * cs.f(x) * np.cos(n * x)))
    return total


# ------------------------------------------------------------ optimal sets


def _check_interval_mesh(mesh: Mesh) -> None:
    if mesh.domain.kind is not DomainKind.INTERVAL:
        raise ConfigurationError("the Cantor complement lives on the interval [0, pi]")


def _in_union(x: np.ndarray, intervals) -> np.ndarray:
    hit = np.zeros(x.shape, dtype=bool)
    for lo, hi in intervals:
        hit |= (x >= lo) & (x <= hi)
    return hit


def cantor_optimal_complement(cs: CantorSet, mesh: Mesh) -> SubsetIndicator:
    """Cells of [0, pi] whose centre lies outside C (closed intervals)."""
    _check_interval_mesh(mesh)
    x = mesh.centers[:, 0]
    bits = ~_in_union(x, cs.intervals())
    return SubsetIndicator(mesh, bits, 1.0 - cs.measure_half() / math.pi)


def doubled_complement(cs: CantorSet, mesh: Mesh) -> SubsetIndicator:
    """Cells x of [0, pi] with 2x (folded into [0, pi]) outside C.

    This is the set that maximises the observed energy of the data built by
    ``cantor_wave_data``: sin^2(jx) only carries the frequency 2j, so the
    energy density is a constant minus a multiple of f(2x).
    """
    _check_interval_mesh(mesh)
    u = np.mod(2 * mesh.centers[:, 0], 2 * math.pi)
    u = np.where(u > math.pi, 2 * math.pi - u, u)
    bits = ~_in_union(u, cs.intervals())
    return SubsetIndicator(mesh, bits, 1.0 - cs.measure_half() / math.pi)


def cantor_wave_data(coeffs: CantorCoefficients) -> InitialData:
    """Wave data on the Dirichlet interval for T = 2 pi with lam_j^2 |a_j|^2 proportional to a^C_j.

    a_j = b_j = sqrt(a^C_j / (8 j^2)); the energy density is then
    const - (pi / 2) f(2x) up to the truncation of the cosine series.
    """
    modes = window_modes(DomainSpec(DomainKind.INTERVAL), len(coeffs.a))
    j = coeffs.n.astype(float)
    amp = np.sqrt(np.maximum(coeffs.a, 0.0) / (8 * j * j))
    return InitialData.wave(modes, amp, amp)
