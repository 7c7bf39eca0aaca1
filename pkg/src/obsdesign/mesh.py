"""Tensor-product meshes, cell quadrature of eigenfunction products, and designs.

Cell ids follow C order over the axes (first axis slowest).  Quadrature is
Gauss-Legendre with ``q`` points per axis; on the radial axis of the disk the
weights carry the Jacobian ``r``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .domains import AxisFactor, DomainSpec, EigenMode
from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class AxisMesh:
    edges: np.ndarray
    radial: bool = False

    @property
    def n(self) -> int:
        return len(self.edges) - 1

    @cached_property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @cached_property
    def measures(self) -> np.ndarray:
        lo, hi = self.edges[:-1], self.edges[1:]
        return 0.5 * (hi * hi - lo * lo) if self.radial else hi - lo

    def quadrature(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """Points and weights of shape (n, q), Jacobian included."""
        if q not in (1, 2, 3):
            raise ConfigurationError(f"quadrature order must be 1, 2 or 3, got {q}")
        nodes, weights = np.polynomial.legendre.leggauss(q)
        lo, hi = self.edges[:-1, None], self.edges[1:, None]
        half = 0.5 * (hi - lo)
        pts = 0.5 * (hi + lo) + half * nodes[None, :]
        w = half * weights[None, :]
        if self.radial:
            w = w * pts
        return pts, w


@dataclass(frozen=True, eq=False)
class Mesh:
    domain: DomainSpec
    axes: tuple[AxisMesh, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.n for a in self.axes)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def measures(self) -> np.ndarray:
        m = self.axes[0].measures
        for ax in self.axes[1:]:
            m = np.multiply.outer(m, ax.measures)
        return np.ascontiguousarray(m).ravel()

    @cached_property
    def centers(self) -> np.ndarray:
        grids = np.meshgrid(*[a.centers for a in self.axes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    @property
    def volume(self) -> float:
        return float(np.sum(self.measures))

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.shape

    def reshape(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values).reshape(self.shape)

    @cached_property
    def _factor_cache(self) -> dict:
        return {}

    def factor_values(self, axis: int, factor: AxisFactor, q: int) -> np.ndarray:
        """Factor sampled at the axis quadrature points, shape (n, q); memoised."""
        key = (axis, factor, q)
        cache = self._factor_cache
        if key not in cache:
            pts, _ = self.axes[axis].quadrature(q)
            cache[key] = np.asarray(factor(pts), dtype=float)
        return cache[key]


def build_mesh(domain: DomainSpec, resolution: int | Sequence[int]) -> Mesh:
    """Uniform tensor mesh; the disk uses (n_r, n_theta) annular sectors."""
    if isinstance(resolution, (int, np.integer)):
        res = (int(resolution),) * domain.dim
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != domain.dim:
        raise ConfigurationError(f"{domain.label()} needs {domain.dim} resolution values, got {res}")
    if any(r < 1 for r in res):
        raise ConfigurationError("resolution must be >= 1 per axis")
    axes = []
    for d, ((lo, hi), n) in enumerate(zip(domain.extents, res)):
        edges = np.linspace(lo, hi, n + 1)
        axes.append(AxisMesh(edges, radial=domain.radial and d == 0))
    return Mesh(domain, tuple(axes))


REFERENCE_RESOLUTION = {
    "Interval1D": 2048,
    "Square2D": (256, 256),
    "Torus2D": (256, 256),
    "Disk2D": (256, 512),
}


def reference_mesh(domain: DomainSpec) -> Mesh:
    return build_mesh(domain, REFERENCE_RESOLUTION[domain.kind.value])


# ---------------------------------------------------------------- designs


@dataclass(frozen=True, eq=False)
class SubsetIndicator:
    mesh: Mesh
    bits: np.ndarray
    L: float | None = None

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool).ravel()
        if bits.size != self.mesh.n_cells:
            raise ConfigurationError("indicator length does not match the mesh")
        object.__setattr__(self, "bits", bits)

    @property
    def values(self) -> np.ndarray:
        return self.bits.astype(float)

    def measure(self) -> float:
        return measure_of(self)

    def fraction(self) -> float:
        return self.measure() / self.mesh.domain.volume

    def volume_defect(self) -> float:
        if self.L is None:
            return 0.0
        return self.measure() - self.L * self.mesh.domain.volume

    def to_field(self) -> "DensityField":
        return DensityField(self.mesh, self.values, self.L if self.L is not None else self.fraction())

    def symmetric_difference(self, other: "SubsetIndicator") -> int:
        return int(np.count_nonzero(self.bits != other.bits))


@dataclass(frozen=True, eq=False)
class DensityField:
    mesh: Mesh
    values: np.ndarray
    L: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size != self.mesh.n_cells:
            raise ConfigurationError("field length does not match the mesh")
        if np.any(vals < -1e-12) or np.any(vals > 1 + 1e-12):
            raise ConfigurationError("density values must lie in [0, 1]")
        object.__setattr__(self, "values", np.clip(vals, 0.0, 1.0))

    def mass(self) -> float:
        return mass_of(self)

    def mass_defect(self) -> float:
        return self.mass() - self.L * self.mesh.domain.volume

    def bang_bang_fraction(self, tol: float = 1e-9) -> float:
        v = self.values
        return float(np.mean((v <= tol) | (v >= 1 - tol)))


def measure_of(s: SubsetIndicator) -> float:
    return float(np.sum(s.mesh.measures * s.bits))


def mass_of(f: DensityField) -> float:
    return float(np.sum(f.values * f.mesh.measures))


def field_values(design) -> np.ndarray:
    """Cell values of an indicator, a field, or a bare array."""
    if isinstance(design, (SubsetIndicator, DensityField)):
        return design.values
    return np.asarray(design, dtype=float).ravel()


# ------------------------------------------------------- mode mass matrices


@dataclass(frozen=True, eq=False)
class ModeMassMatrix:
    """w[j, c] ~ integral of phi_j^2 over cell c, stored as per-axis factor tables.

    Row j is the tensor product of ``tables[d][rows[j, d]]`` over the axes d.
    """

    mesh: Mesh
    modes: tuple[EigenMode, ...]
    q: int
    tables: tuple[np.ndarray, ...]
    rows: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def lams(self) -> np.ndarray:
        return np.array([m.lam for m in self.modes])

    def window(self, n: int) -> "ModeMassMatrix":
        """The first ``n`` rows."""
        return self.select(range(n))

    def select(self, rows) -> "ModeMassMatrix":
        rows = list(rows)
        return ModeMassMatrix(self.mesh, tuple(self.modes[i] for i in rows), self.q, self.tables, self.rows[rows])

    def row_masses(self, values) -> np.ndarray:
        """sum_c a_c w[j, c] for every row j."""
        a = field_values(values)
        if len(self.tables) == 1:
            return self.tables[0][self.rows[:, 0]] @ a
        t1, t2 = self.tables
        inner = t1 @ a.reshape(self.mesh.shape) @ t2.T
        return inner[self.rows[:, 0], self.rows[:, 1]]

    def combine(self, weights) -> np.ndarray:
        """sum_j weights_j w[j, c] for every cell c."""
        w = np.asarray(weights, dtype=float)
        if len(self.tables) == 1:
            return w @ self.tables[0][self.rows[:, 0]]
        t1, t2 = self.tables
        out = (t1[self.rows[:, 0]].T * w) @ t2[self.rows[:, 1]]
        return out.ravel()

    def row_sums(self) -> np.ndarray:
        return np.prod([t[self.rows[:, d]].sum(axis=1) for d, t in enumerate(self.tables)], axis=0)

    def dense(self) -> np.ndarray:
        if len(self.tables) == 1:
            return self.tables[0][self.rows[:, 0]].copy()
        t1, t2 = self.tables
        a, b = t1[self.rows[:, 0]], t2[self.rows[:, 1]]
        return (a[:, :, None] * b[:, None, :]).reshape(len(self.modes), -1)


def _axis_tables(mesh: Mesh, modes: Sequence[EigenMode], q: int):
    tables, rows = [], np.zeros((len(modes), mesh.domain.dim), dtype=int)
    for d, ax in enumerate(mesh.axes):
        uniq: dict[AxisFactor, int] = {}
        for i, m in enumerate(modes):
            rows[i, d] = uniq.setdefault(m.factors[d], len(uniq))
        _, w = ax.quadrature(q)
        table = np.empty((len(uniq), ax.n))
        for f, r in uniq.items():
            v = mesh.factor_values(d, f, q)
            table[r] = np.sum(w * v * v, axis=1)
        tables.append(table)
    return tuple(tables), rows


def mode_mass(mesh: Mesh, modes: Sequence[EigenMode], q: int = 1) -> ModeMassMatrix:
    if not modes:
        raise ConfigurationError("mode list is empty")
    tables, rows = _axis_tables(mesh, modes, q)
    return ModeMassMatrix(mesh, tuple(modes), q, tables, rows)


def _pair_tables(mesh: Mesh, modes: Sequence[EigenMode], pairs_j, pairs_k, q: int):
    """Per-axis tables of integral(f g) over cells for the factor pairs used."""
    tables, pair_rows = [], np.zeros((len(pairs_j), mesh.domain.dim), dtype=int)
    for d, ax in enumerate(mesh.axes):
        _, w = ax.quadrature(q)
        uniq: dict[tuple[AxisFactor, AxisFactor], int] = {}
        for p, (j, k) in enumerate(zip(pairs_j, pairs_k)):
            fj, fk = modes[j].factors[d], modes[k].factors[d]
            key = (fj, fk) if repr(fj) <= repr(fk) else (fk, fj)
            pair_rows[p, d] = uniq.setdefault(key, len(uniq))
        table = np.empty((len(uniq), ax.n))
        for (f, g), r in uniq.items():
            table[r] = np.sum(w * mesh.factor_values(d, f, q) * mesh.factor_values(d, g, q), axis=1)
        tables.append(table)
    return tables, pair_rows


def cross_mass(mesh: Mesh, modes: Sequence[EigenMode], design=None, q: int = 1) -> np.ndarray:
    """Matrix of integral over the design of phi_j phi_k (symmetric, M x M)."""
    a = np.ones(mesh.n_cells) if design is None else field_values(design)
    m = len(modes)
    jj, kk = np.triu_indices(m)
    tables, pr = _pair_tables(mesh, modes, jj, kk, q)
    if len(tables) == 1:
        vals = tables[0][pr[:, 0]] @ a
    else:
        inner = tables[0] @ a.reshape(mesh.shape) @ tables[1].T
        vals = inner[pr[:, 0], pr[:, 1]]
    out = np.zeros((m, m))
    out[jj, kk] = vals
    out[kk, jj] = vals
    return out


def cell_quadratic_form(mesh: Mesh, modes: Sequence[EigenMode], coeff: np.ndarray, q: int = 1) -> np.ndarray:
    """Per-cell integrals of sum_{j,k} coeff[j,k] phi_j phi_k (coeff real symmetric).

    Off-diagonal entries below 1e-12 sqrt(|c_jj c_kk|) are treated as exact
    zeros, so diagonal forms cost one mass-matrix combination.
    """
    c = np.asarray(coeff, dtype=float)
    c = 0.5 * (c + c.T)
    diag = np.abs(np.diag(c))
    noise = 1e-12 * np.sqrt(np.multiply.outer(diag, diag))
    jj, kk = np.nonzero(np.triu(np.abs(c) > noise, k=1))
    result = mode_mass(mesh, modes, q).combine(np.diag(c))
    if len(jj) == 0:
        return result
    weights = 2.0 * c[jj, kk]
    tables, pr = _pair_tables(mesh, modes, jj, kk, q)
    if len(tables) == 1:
        acc = np.zeros(tables[0].shape[0])
        np.add.at(acc, pr[:, 0], weights)
        return result + acc @ tables[0]
    s = np.zeros((tables[0].shape[0], tables[1].shape[0]))
    np.add.at(s, (pr[:, 0], pr[:, 1]), weights)
    return result + (tables[0].T @ s @ tables[1]).ravel()


# ------------------------------------------------------------------ export


def write_cells_csv(path, mesh: Mesh, values, value_name: str = "value") -> None:
    """Rows (cell_id, center coordinates..., measure, value)."""
    vals = field_values(values)
    names = ["x"] if mesh.domain.dim == 1 else (["r", "theta"] if mesh.domain.radial else ["x1", "x2"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", *names, "measure", value_name])
        for cid, (ctr, meas, v) in enumerate(zip(mesh.centers, mesh.measures, vals)):
            writer.writerow([cid, *(repr(float(x)) for x in ctr), repr(float(meas)), repr(float(v))])
