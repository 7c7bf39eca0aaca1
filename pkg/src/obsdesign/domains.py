"""Model domains and the Laplacian eigenbases used throughout the package.

Every supported eigenfunction is a product of one-dimensional factors, one per
coordinate axis: (x,) on the interval, (x1, x2) on the square and torus, and
(r, theta) on the disk.  Meshes are tensor products along the same axes, so
cell integrals of eigenfunction products factorise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import count

import numpy as np

from .bessel import MAX_ORDER, MAX_ZERO_INDEX, bessel_zero, disk_radial
from .errors import ConfigurationError


class DomainKind(str, enum.Enum):
    INTERVAL = "Interval1D"
    SQUARE = "Square2D"
    TORUS = "Torus2D"
    DISK = "Disk2D"


class Boundary(str, enum.Enum):
    DIRICHLET = "Dirichlet"
    NEUMANN = "Neumann"
    MIXED = "MixedDN"
    PERIODIC = "Periodic"


_SUPPORTED = {
    DomainKind.INTERVAL: {Boundary.DIRICHLET, Boundary.NEUMANN, Boundary.MIXED},
    DomainKind.SQUARE: {Boundary.DIRICHLET, Boundary.NEUMANN, Boundary.MIXED},
    DomainKind.TORUS: {Boundary.PERIODIC},
    DomainKind.DISK: {Boundary.DIRICHLET},
}


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind
    boundary: Boundary = Boundary.DIRICHLET

    def __post_init__(self):
        kind = DomainKind(self.kind)
        boundary = Boundary(self.boundary)
        if kind is DomainKind.TORUS and boundary is Boundary.DIRICHLET:
            boundary = Boundary.PERIODIC  # the torus has no boundary
        if boundary not in _SUPPORTED[kind]:
            raise ConfigurationError(f"unsupported boundary {boundary.value} on {kind.value}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "boundary", boundary)

    @property
    def dim(self) -> int:
        return 1 if self.kind is DomainKind.INTERVAL else 2

    @property
    def volume(self) -> float:
        return {
            DomainKind.INTERVAL: math.pi,
            DomainKind.SQUARE: math.pi**2,
            DomainKind.TORUS: 4 * math.pi**2,
            DomainKind.DISK: math.pi,
        }[self.kind]

    @property
    def extents(self) -> tuple[tuple[float, float], ...]:
        if self.kind is DomainKind.INTERVAL:
            return ((0.0, math.pi),)
        if self.kind is DomainKind.SQUARE:
            return ((0.0, math.pi), (0.0, math.pi))
        if self.kind is DomainKind.TORUS:
            return ((0.0, 2 * math.pi), (0.0, 2 * math.pi))
        return ((0.0, 1.0), (0.0, 2 * math.pi))

    @property
    def radial(self) -> bool:
        return self.kind is DomainKind.DISK

    def label(self) -> str:
        return f"{self.kind.value}/{self.boundary.value}"


# One-dimensional factor families.
SINE = "sine"            # sqrt(2/pi) sin(j x) on [0, pi], j >= 1
SINE_HALF = "sine_half"  # sqrt(2/pi) sin((j - 1/2) x) on [0, pi], j >= 1
COSINE = "cosine"        # cos(j x) on [0, pi], j >= 0, L^2 normalised
FOURIER = "fourier"      # 2pi-periodic: j > 0 cos, j < 0 sin, j = 0 constant
RADIAL = "radial"        # R_{jk}(r), index (j, k)
ANGULAR = "angular"      # disk angular part, index (j, m)

_SQRT_2_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class AxisFactor:
    """A normalised one-dimensional eigenfunction factor."""

    family: str
    index: int | tuple[int, int]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        f, i = self.family, self.index
        if f == SINE:
            return _SQRT_2_PI * np.sin(i * x)
        if f == SINE_HALF:
            return _SQRT_2_PI * np.sin((i - 0.5) * x)
        if f == COSINE:
            if i == 0:
                return np.full_like(x, 1.0 / math.sqrt(math.pi))
            return _SQRT_2_PI * np.cos(i * x)
        if f == FOURIER:
            if i == 0:
                return np.full_like(x, 1.0 / math.sqrt(2 * math.pi))
            trig = np.cos if i > 0 else np.sin
            return trig(abs(i) * x) / math.sqrt(math.pi)
        if f == RADIAL:
            return disk_radial(i[0], i[1], x)
        if f == ANGULAR:
            j, m = i
            if j == 0:
                return np.full_like(x, 1.0 / math.sqrt(2 * math.pi))
            trig = np.cos if m == 1 else np.sin
            return trig(j * x) / math.sqrt(math.pi)
        raise ConfigurationError(f"unknown factor family {f}")


@dataclass(frozen=True)
class EigenMode:
    """One eigenpair: multi-index, frequency lambda and per-axis factors."""

    index: tuple[int, ...]
    lam: float
    factors: tuple[AxisFactor, ...]

    def eval(self, points) -> np.ndarray:
        """Evaluate at points given in the domain's axis coordinates.

        ``points`` has shape (..., dim); a 1-D domain also accepts a bare array.
        """
        pts = np.asarray(points, dtype=float)
        if len(self.factors) == 1:
            x = pts[..., 0] if pts.ndim and pts.shape[-1:] == (1,) else pts
            return self.factors[0](x)
        return self.factors[0](pts[..., 0]) * self.factors[1](pts[..., 1])

    @property
    def lam_sq(self) -> float:
        return self.lam * self.lam


def _axis_families(domain: DomainSpec) -> tuple[str, ...]:
    b = domain.boundary
    if domain.kind is DomainKind.INTERVAL:
        return ({Boundary.DIRICHLET: SINE, Boundary.NEUMANN: COSINE, Boundary.MIXED: SINE_HALF}[b],)
    if domain.kind is DomainKind.SQUARE:
        return {
            Boundary.DIRICHLET: (SINE, SINE),
            Boundary.NEUMANN: (COSINE, COSINE),
            Boundary.MIXED: (SINE, COSINE),
        }[b]
    return (FOURIER, FOURIER)


def _axis_indices(family: str):
    """Axis indices in increasing-frequency order."""
    if family in (SINE, SINE_HALF):
        return count(1)
    if family == COSINE:
        return count(0)

    def periodic():
        yield 0
        for j in count(1):
            yield j
            yield -j

    return periodic()


def _axis_freq(family: str, i: int) -> float:
    return i - 0.5 if family == SINE_HALF else float(abs(i))


def _make_mode(domain: DomainSpec, index: tuple[int, ...]) -> EigenMode:
    if domain.kind is DomainKind.DISK:
        j, k, m = index
        return EigenMode(index, bessel_zero(j, k), (AxisFactor(RADIAL, (j, k)), AxisFactor(ANGULAR, (j, m))))
    fams = _axis_families(domain)
    if len(fams) == 1:
        lam = _axis_freq(fams[0], index[0])
    else:
        lam = math.sqrt(index[0] ** 2 + index[1] ** 2)
    return EigenMode(index, lam, tuple(AxisFactor(f, i) for f, i in zip(fams, index)))


def _is_constant(domain: DomainSpec, index: tuple[int, ...]) -> bool:
    if domain.kind is DomainKind.DISK:
        return False
    fams = _axis_families(domain)
    return all(f in (COSINE, FOURIER) and i == 0 for f, i in zip(fams, index))


def _sort(modes: list[EigenMode]) -> list[EigenMode]:
    return sorted(modes, key=lambda m: (m.lam, m.index))


def enumerate_modes(domain: DomainSpec, cutoff: float, include_constant_mode: bool = False) -> list[EigenMode]:
    """All modes with frequency <= cutoff, sorted by (lambda, multi-index)."""
    if not cutoff > 0:
        raise ConfigurationError("frequency cutoff must be positive")
    out: list[EigenMode] = []
    if domain.kind is DomainKind.DISK:
        for j in range(MAX_ORDER + 1):
            if bessel_zero(j, 1) > cutoff:
                break
            for k in range(1, MAX_ZERO_INDEX + 1):
                if bessel_zero(j, k) > cutoff:
                    break
                for m in ((1,) if j == 0 else (1, 2)):
                    out.append(_make_mode(domain, (j, k, m)))
        return _sort(out)
    fams = _axis_families(domain)
    limit = int(math.floor(cutoff)) + 1
    if len(fams) == 1:
        for i in _axis_indices(fams[0]):
            if _axis_freq(fams[0], i) > cutoff:
                break
            if include_constant_mode or not _is_constant(domain, (i,)):
                out.append(_make_mode(domain, (i,)))
        return _sort(out)
    axis = [[i for i in _take_while_small(f, limit)] for f in fams]
    csq = cutoff * cutoff
    for i in axis[0]:
        for k in axis[1]:
            if i * i + k * k > csq + 1e-9:
                continue
            if not include_constant_mode and _is_constant(domain, (i, k)):
                continue
            out.append(_make_mode(domain, (i, k)))
    return _sort(out)


def _take_while_small(family: str, limit: int):
    for i in _axis_indices(family):
        if abs(i) > limit:
            return
        yield i


def window_modes(domain: DomainSpec, n: int) -> list[EigenMode]:
    """Truncation window of size ``n`` per axis, sorted by (lambda, index).

    Interval: the first n modes.  Square/torus: all products of the first n
    indices of each axis (constant excluded).  Disk: angular order j < n and
    radial index k <= n, both orientations m for j >= 1.
    """
    if n < 1:
        raise ConfigurationError("window size must be >= 1")
    if domain.kind is DomainKind.DISK:
        out = [
            _make_mode(domain, (j, k, m))
            for j in range(n)
            for k in range(1, n + 1)
            for m in ((1,) if j == 0 else (1, 2))
        ]
        return _sort(out)
    fams = _axis_families(domain)
    axis = [[i for _, i in zip(range(n), _axis_indices(f))] for f in fams]
    if len(fams) == 1:
        idx = ((i,) for i in _axis_indices(fams[0]) if not _is_constant(domain, (i,)))
        return _sort([_make_mode(domain, t) for t in _first(idx, n)])
    out = [
        _make_mode(domain, (i, k))
        for i in axis[0]
        for k in axis[1]
        if not _is_constant(domain, (i, k))
    ]
    if not out:
        raise ConfigurationError(f"window {n} is empty on {domain.label()}")
    return _sort(out)


def _first(iterable, n):
    out = []
    for item in iterable:
        out.append(item)
        if len(out) == n:
            break
    return out
