"""Explicit designs: equidistributed sets, the 1D comb family omega_N, radial disk sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domains import DomainKind
from .errors import ConfigurationError
from .mesh import Mesh, SubsetIndicator


def _block_ids(mesh: Mesh, blocks: int | Sequence[int]) -> list[np.ndarray]:
    """Cell ids of every tensor macro-block, blocks in C order, ids ascending."""
    per_axis = (int(blocks),) * mesh.domain.dim if np.isscalar(blocks) else tuple(int(b) for b in blocks)
    if len(per_axis) != mesh.domain.dim:
        raise ConfigurationError(f"need {mesh.domain.dim} block counts, got {per_axis}")
    if any(p < 1 or p > n for p, n in zip(per_axis, mesh.shape)):
        raise ConfigurationError(f"block counts {per_axis} do not fit mesh {mesh.shape}")
    splits = [np.array_split(np.arange(n), p) for n, p in zip(mesh.shape, per_axis)]
    ids = np.arange(mesh.n_cells).reshape(mesh.shape)
    out = []
    if len(splits) == 1:
        return [ids[s] for s in splits[0]]
    for rows in splits[0]:
        for cols in splits[1]:
            out.append(ids[np.ix_(rows, cols)].ravel())
    return out


def equidistributed_set(mesh: Mesh, blocks: int | Sequence[int], L: float) -> SubsetIndicator:
    """Fraction L of every macro-block, lowest cell ids first.

    Targets are cumulative over blocks, so rounding never drifts: each block
    carries L times its mass up to one cell.
    """
    if not 0 < L < 1:
        raise ConfigurationError("volume fraction L must lie in (0, 1)")
    groups = _block_ids(mesh, blocks)
    need = math.ceil(1.0 / L)
    small = [len(g) for g in groups if len(g) < need]
    if small:
        raise ConfigurationError(f"macro-blocks need at least {need} cells for L={L}, smallest has {min(small)}")
    meas = mesh.measures
    bits = np.zeros(mesh.n_cells, dtype=bool)
    target = selected = 0.0
    for g in groups:
        target += L * float(np.sum(meas[g]))
        for c in g:
            if selected + 0.5 * meas[c] > target:
                break
            bits[c] = True
            selected += meas[c]
    return SubsetIndicator(mesh, bits, L)


# ----------------------------------------------------------- comb family


def omega_family_intervals(N: int, L: float, length: float = math.pi) -> list[tuple[float, float]]:
    """N intervals of total length L*length centred at k*length/(N+1), k = 1..N."""
    if N < 1:
        raise ConfigurationError("the comb family needs N >= 1")
    if not 0 < L < 1:
        raise ConfigurationError("volume fraction L must lie in (0, 1)")
    half = L * length / (2 * N)
    spacing = length / (N + 1)
    if 2 * half > spacing or half > spacing:
        raise ConfigurationError(f"comb intervals overlap for N={N}, L={L}")
    return [(k * spacing - half, k * spacing + half) for k in range(1, N + 1)]


def omega_family_sine_mass(N: int, L: float, j: int) -> float:
    """Closed form of int over omega_N of sin^2(j x) dx on [0, pi]."""
    s = math.sin(j * L * math.pi / N)
    if j % (N + 1) == 0:
        return L * math.pi / 2 - N * s / (2 * j)
    return L * math.pi / 2 + s / (2 * j)


@dataclass(frozen=True, eq=False)
class OmegaFamily:
    N: int
    L: float
    intervals: tuple[tuple[float, float], ...]
    indicator: SubsetIndicator

    def mode_mass(self, j: int) -> float:
        """Exact mass of the normalised Dirichlet mode sqrt(2/pi) sin(j x)."""
        return 2.0 / math.pi * omega_family_sine_mass(self.N, self.L, j)

    @property
    def exact_measure(self) -> float:
        return self.L * math.pi


def _cells_in(centers: np.ndarray, intervals) -> np.ndarray:
    bits = np.zeros(centers.shape, dtype=bool)
    for lo, hi in intervals:
        bits |= (centers >= lo) & (centers < hi)
    return bits


def omega_family_1d(N: int, L: float, mesh: Mesh) -> OmegaFamily:
    """The comb omega_N on an interval mesh, cellified by cell centres."""
    if mesh.domain.kind is not DomainKind.INTERVAL:
        raise ConfigurationError("the comb family lives on the interval")
    intervals = omega_family_intervals(N, L)
    bits = _cells_in(mesh.centers[:, 0], intervals)
    return OmegaFamily(N, L, tuple(intervals), SubsetIndicator(mesh, bits, L))


# ------------------------------------------------------------ disk sets


def radial_set_disk(mesh: Mesh, angular_intervals: Sequence[tuple[float, float]], L: float | None = None) -> SubsetIndicator:
    """All (r, theta) cells whose angular centre lies in the given union of intervals."""
    if mesh.domain.kind is not DomainKind.DISK:
        raise ConfigurationError("radial sets live on the disk")
    theta = mesh.axes[1].centers
    ang = _cells_in(theta, angular_intervals)
    bits = np.broadcast_to(ang[None, :], mesh.shape).ravel()
    return SubsetIndicator(mesh, bits, L)


def angular_comb(N: int, L: float) -> list[tuple[float, float]]:
    """The comb family on [0, 2 pi]; its angular measure is 2 L pi."""
    return omega_family_intervals(N, L, 2 * math.pi)


def angular_comb_mass(N: int, L: float, j: int, m: int) -> float:
    """Exact int over the angular comb of Y_{jm}^2 (Y = cos or sin times 1/sqrt(pi), j = 0 constant).

    Substituting theta = 2x maps the comb onto omega_N on [0, pi] and sin(j theta)
    onto sin(2j x).
    """
    if j == 0:
        return L
    sine = 2.0 / math.pi * omega_family_sine_mass(N, L, 2 * j)
    return sine if m == 2 else 2 * L - sine
