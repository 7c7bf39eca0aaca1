"""Bessel functions of the first kind, their zeros, and the disk radial profiles.

Evaluation uses the ascending power series where it is free of cancellation
and Miller's downward recurrence (normalised by ``J_0 + 2 sum J_2k = 1``)
everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericalError

MAX_ORDER = 60
MAX_ARG = 200.0
MAX_ZERO_INDEX = 60

# The zero finder needs values past MAX_ARG (z_{60,60} is about 280).
_INTERNAL_MAX_ARG = 400.0
_RESCALE = 1e250


def _use_series(order: int, x: np.ndarray) -> np.ndarray:
    # Terms decrease monotonically once (x/2)^2 <= order + 1; below x = 8 the
    # largest term is at most a few hundred, so cancellation stays harmless.
    return (x < 8.0) | (0.25 * x * x <= order + 1)


def _series(order: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = np.exp(order * np.log(np.where(half > 0, half, 1.0)) - math.lgamma(order + 1))
    term = np.where(half > 0, term, 1.0 if order == 0 else 0.0)
    total = term.copy()
    quarter_sq = half * half
    for k in range(1, 400):
        term = -term * quarter_sq / (k * (k + order))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _miller(order: int, x: np.ndarray) -> np.ndarray:
    """Downward recurrence from well above max(order, x), normalised at the end."""
    top = max(order, float(x.max()))
    start = int(top + 60 + 12 * math.sqrt(top))
    start += start % 2
    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-300)
    wanted = np.zeros_like(x)
    norm = np.zeros_like(x)
    inv_x = 1.0 / x
    for k in range(start, 0, -1):
        # current = J_k, upper = J_{k+1}; step to J_{k-1}
        lower = 2.0 * k * inv_x * current - upper
        upper, current = current, lower
        if k - 1 == order:
            wanted = current.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * current
        big = np.abs(current) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            upper *= scale
            current *= scale
            wanted *= scale
            norm *= scale
    norm += current  # J_0
    return wanted / norm


def _bessel_j_unchecked(order: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    out = np.empty_like(flat)
    series_mask = _use_series(order, flat)
    if np.any(series_mask):
        out[series_mask] = _series(order, flat[series_mask])
    if np.any(~series_mask):
        out[~series_mask] = _miller(order, flat[~series_mask])
    return out.reshape(x.shape) if x.ndim else out[0]


def bessel_j(order: int, x):
    """J_order(x) for integer order in [0, 60] and 0 <= x <= 200 (array-aware)."""
    if not isinstance(order, (int, np.integer)) or order < 0 or order > MAX_ORDER:
        raise DomainError(f"bessel order must be an integer in [0, {MAX_ORDER}], got {order!r}")
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > MAX_ARG):
        raise DomainError(f"bessel argument outside [0, {MAX_ARG}]")
    result = _bessel_j_unchecked(int(order), arr)
    return float(result) if arr.ndim == 0 else result


def bessel_j_prime(order: int, x):
    """Derivative via J'_n = J_{n-1} - (n/x) J_n, and J'_0 = -J_1."""
    if order == 0:
        return -_bessel_j_unchecked(1, x)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = _bessel_j_unchecked(order - 1, x) - order / x * _bessel_j_unchecked(order, x)
    if x.ndim == 0:
        return float(0.5 if order == 1 and x == 0 else val)
    return np.where(x == 0, 0.5 if order == 1 else 0.0, val)


def _mcmahon(order: int, k: int) -> float:
    mu = 4.0 * order * order
    beta = (k + 0.5 * order - 0.25) * math.pi
    e = 8.0 * beta
    return beta - (mu - 1) / e - 4 * (mu - 1) * (7 * mu - 31) / (3 * e**3)


@lru_cache(maxsize=None)
def _zeros(order: int) -> np.ndarray:
    """First MAX_ZERO_INDEX positive zeros of J_order.

    McMahon's expansion sets the scan window; sign changes on a grid finer
    than half the zero spacing give brackets, which are refined together by
    bisection and then Newton.
    """
    count = MAX_ZERO_INDEX
    lo = float(order) if order > 0 else 1e-3  # j_{n,1} > n
    hi = min(_mcmahon(order, count) + 2.0 * order + 20.0, _INTERNAL_MAX_ARG)
    grid = np.arange(lo, hi, 0.1)
    vals = _bessel_j_unchecked(order, grid)
    flips = np.nonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:]))[0]
    if len(flips) < count:
        raise NumericalError(
            f"zero bracketing failed for order {order}: found {len(flips)} sign changes "
            f"in [{lo:.3f}, {hi:.3f}], needed {count}"
        )
    a, b = grid[flips[:count]].copy(), grid[flips[:count] + 1].copy()
    fa = _bessel_j_unchecked(order, a)
    for _ in range(14):
        m = 0.5 * (a + b)
        fm = _bessel_j_unchecked(order, m)
        same = np.signbit(fm) == np.signbit(fa)
        a, fa = np.where(same, m, a), np.where(same, fm, fa)
        b = np.where(same, b, m)
    z = 0.5 * (a + b)
    for _ in range(4):
        z = z - _bessel_j_unchecked(order, z) / bessel_j_prime(order, z)
    if np.any(z < grid[flips[:count]] - 1e-9) or np.any(z > grid[flips[:count] + 1] + 1e-9):
        raise NumericalError(f"Newton polish left its bracket for order {order}")
    return z


def bessel_zero(order: int, k: int) -> float:
    """k-th positive zero of J_order (order <= 60, k <= 60)."""
    if order < 0 or order > MAX_ORDER or k < 1 or k > MAX_ZERO_INDEX:
        raise DomainError(f"zero index out of range: order={order}, k={k}")
    return float(_zeros(int(order))[k - 1])


@dataclass(frozen=True)
class BesselTable:
    order: int
    zeros: tuple[float, ...]
    derivatives: tuple[float, ...]

    @classmethod
    def build(cls, order: int, count: int) -> "BesselTable":
        zs = tuple(bessel_zero(order, k) for k in range(1, count + 1))
        return cls(order, zs, tuple(float(bessel_j_prime(order, z)) for z in zs))


@lru_cache(maxsize=None)
def _radial_constants(j: int, k: int) -> tuple[float, float]:
    z = bessel_zero(j, k)
    return z, math.sqrt(2.0) / abs(float(bessel_j_prime(j, z)))


def disk_radial(j: int, k: int, r):
    """R_jk(r) = sqrt(2) J_j(z_jk r) / |J_j'(z_jk)|, normalised in L^2(r dr)."""
    z, scale = _radial_constants(j, k)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > 1 + 1e-12):
        raise DomainError("radial coordinate must lie in [0, 1]")
    vals = scale * _bessel_j_unchecked(j, np.clip(r, 0.0, 1.0) * z)
    return float(vals) if r.ndim == 0 else vals
