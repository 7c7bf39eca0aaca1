"""obsdesign <problem1|problem2|constants|cantor|nogap> --config FILE [--override k=v ...] --out DIR"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cantor import (
    CantorParams,
    build_cantor,
    cantor_coefficients,
    cantor_optimal_complement,
    cantor_wave_data,
    doubled_complement,
    quadrature_coefficient,
)
from .config import COMMANDS, resolve_config
from .domains import DomainKind, DomainSpec, enumerate_modes, window_modes
from .errors import ConfigurationError, ObsDesignError
from .functionals import (
    InitialData,
    J,
    J_weighted,
    asymptotic_constant_clustered,
    gamma_weights,
    hum_gram,
    randomized_constant,
)
from .mesh import (
    Mesh,
    SubsetIndicator,
    build_mesh,
    cross_mass,
    mode_mass,
    reference_mesh,
    write_cells_csv,
)
from .problem1 import solve_problem1
from .problem2 import detect_stationarity, knapsack_fill, solve_problem2
from .sequences import angular_comb, equidistributed_set, omega_family_1d, radial_set_disk


# ------------------------------------------------------------------ output


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path: Path, payload: dict) -> None:
    text = json.dumps(_plain(payload), sort_keys=True, indent=2)
    path.write_text(text + "\n")


def _write_grid(path: Path, mesh: Mesh, values) -> None:
    grid = mesh.reshape(np.asarray(values, dtype=float))
    np.savetxt(path, np.atleast_2d(grid), fmt="%.17g")


def _emit_field(out: Path, stem: str, mesh: Mesh, values, cfg: dict, name: str = "value") -> None:
    write_cells_csv(out / f"{stem}.csv", mesh, values, name)
    if cfg["grid"]:
        _write_grid(out / f"{stem}.dat", mesh, values)


# --------------------------------------------------------------- builders


def domain_of(cfg: dict) -> DomainSpec:
    return DomainSpec(DomainKind(cfg["domain"]), cfg["boundary"])


def mesh_of(cfg: dict, domain: DomainSpec) -> Mesh:
    return reference_mesh(domain) if cfg["resolution"] is None else build_mesh(domain, cfg["resolution"])


def _as_list(v):
    return v if isinstance(v, list) else [v]


def first_modes(domain: DomainSpec, count: int):
    """The ``count`` lowest modes of the domain (ties by multi-index)."""
    cutoff = 2.0
    while True:
        modes = enumerate_modes(domain, cutoff)
        if len(modes) >= count:
            return modes[:count]
        cutoff *= 1.5


def initial_data(cfg: dict, domain: DomainSpec) -> InitialData:
    preset = cfg["data.preset"]
    if preset in ("preset1", "preset2"):
        if domain.kind is not DomainKind.SQUARE:
            raise ConfigurationError(f"{preset} is defined on Square2D")
        modes = window_modes(domain, cfg["data.modes"])
        n = np.array([m.index[0] for m in modes], dtype=float)
        k = np.array([m.index[1] for m in modes], dtype=float)
        if preset == "preset1":
            y0 = 1.0 / (n * n + k * k)
        else:
            y0 = (1.0 - (-1.0) ** (n + k)) / (n * n * k * k)
        if cfg["data.equation"] == "schrodinger":
            return InitialData.schrodinger(modes, y0)
        return InitialData.from_wave_state(modes, y0, np.zeros_like(y0))
    if preset == "single_mode":
        modes = first_modes(domain, 1)
        if cfg["data.equation"] == "schrodinger":
            return InitialData.schrodinger(modes, [1.0])
        return InitialData.wave(modes, [0.5], [0.5])
    if cfg["data.equation"] == "schrodinger":
        c = cfg["data.c"]
        if not c:
            raise ConfigurationError("Schrodinger data needs data.c or a preset")
        return InitialData.schrodinger(first_modes(domain, len(c)), c)
    a, b = cfg["data.a"], cfg["data.b"]
    if not a or len(a) != len(b):
        raise ConfigurationError("wave data needs data.a and data.b of equal nonzero length, or a preset")
    return InitialData.wave(first_modes(domain, len(a)), a, b)


def builtin_set(cfg: dict, mesh: Mesh) -> SubsetIndicator:
    name = cfg["set"]
    dom = mesh.domain
    if name == "full":
        return SubsetIndicator(mesh, np.ones(mesh.n_cells, dtype=bool))
    if name == "empty":
        return SubsetIndicator(mesh, np.zeros(mesh.n_cells, dtype=bool))
    if name == "half":
        lo, hi = dom.extents[0]
        return SubsetIndicator(mesh, mesh.centers[:, 0] <= 0.5 * (lo + hi), 0.5)
    if name == "comb":
        if dom.kind is DomainKind.INTERVAL:
            return omega_family_1d(cfg["set_N"], cfg["set_L"], mesh).indicator
        if dom.kind is DomainKind.DISK:
            return radial_set_disk(mesh, angular_comb(cfg["set_N"], cfg["set_L"]), cfg["set_L"])
        raise ConfigurationError("the comb set exists on the interval and the disk")
    return read_set_csv(Path(name), mesh)


def read_set_csv(path: Path, mesh: Mesh) -> SubsetIndicator:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigurationError(f"cannot read set file {path}: {exc}") from exc
    if not rows:
        raise ConfigurationError(f"set file {path} is empty")
    value_col = [c for c in rows[0] if c not in ("cell_id", "x", "x1", "x2", "r", "theta", "measure")]
    if "cell_id" not in rows[0] or len(value_col) != 1:
        raise ConfigurationError(f"set file {path} needs cell_id and exactly one value column")
    bits = np.zeros(mesh.n_cells, dtype=bool)
    for row in rows:
        cid = int(row["cell_id"])
        if not 0 <= cid < mesh.n_cells:
            raise ConfigurationError(f"cell id {cid} outside the mesh")
        bits[cid] = float(row[value_col[0]]) >= 0.5
    return SubsetIndicator(mesh, bits)


# ---------------------------------------------------------------- commands


def cmd_problem1(cfg: dict, out: Path) -> dict:
    domain = domain_of(cfg)
    mesh = mesh_of(cfg, domain)
    data = initial_data(cfg, domain)
    payload = {"problem": "problem1", "domain": domain.kind.value, "bc": domain.boundary.value, "T": cfg["T"]}
    runs = []
    for L in _as_list(cfg["L"]):
        res = solve_problem1(data, cfg["T"], mesh, L, cfg["quadrature"])
        stem = f"problem1_L{L:g}"
        _emit_field(out, f"{stem}_phi", mesh, res.density, cfg, "phi")
        _emit_field(out, f"{stem}_set", mesh, res.set.values, cfg, "in_set")
        runs.append({"L": L, "file_stem": stem, **res.to_dict()})
    payload["runs"] = runs
    return payload


def _problem2_record(res, mass, gamma, L) -> dict:
    dens = mass.combine(res.alpha * gamma) / mass.mesh.measures
    fill = knapsack_fill(dens, mass.mesh.measures, L * mass.mesh.volume)
    cut = dens[(fill > 0) & (fill < 1)]
    threshold = float(cut[0]) if cut.size else float(np.min(dens[fill > 0]))
    vals = res.field.values
    rec = res.to_dict()
    rec.update(
        threshold=threshold,
        set_cells=[int(c) for c in np.nonzero(vals >= 1 - 1e-9)[0]],
        fractional_cells=[int(c) for c in np.nonzero((vals > 1e-9) & (vals < 1 - 1e-9))[0]],
    )
    return rec


def cmd_problem2(cfg: dict, out: Path) -> dict:
    domain = domain_of(cfg)
    mesh = mesh_of(cfg, domain)
    q = cfg["quadrature"]
    cache: dict[int, object] = {}

    def mass_for(n):
        if n not in cache:
            cache[n] = mode_mass(mesh, window_modes(domain, n), q)
        return cache[n]

    gamma_for = gamma_weights if cfg["weighted"] else None
    payload = {"problem": "problem2", "domain": domain.kind.value, "bc": domain.boundary.value,
               "weighted": cfg["weighted"]}
    runs = []
    for N in _as_list(cfg["N"]):
        mass = mass_for(N)
        gamma = gamma_weights(mass.modes) if cfg["weighted"] else np.ones(mass.n_modes)
        for L in _as_list(cfg["L"]):
            res = solve_problem2(mass, None, L, gamma if cfg["weighted"] else None, tol=cfg["tol"],
                                 max_iter=cfg["max_iter"] or None, symmetric=cfg["symmetric"])
            stem = f"problem2_N{N}_L{L:g}"
            _emit_field(out, f"{stem}_field", mesh, res.field.values, cfg, "density")
            runs.append({"N": N, "L": L, "file_stem": stem, **_problem2_record(res, mass, gamma, L)})
    payload["runs"] = runs
    if cfg["stationarity"]:
        sweeps = []
        for L in _as_list(cfg["L"]):
            rep = detect_stationarity(mass_for, L, gamma_for, cfg["n_max"], solver_tol=min(cfg["tol"], 1e-9))
            sweeps.append({"L": L, **rep.to_dict()})
        payload["stationarity"] = sweeps
    return payload


def cmd_constants(cfg: dict, out: Path) -> dict:
    domain = domain_of(cfg)
    mesh = mesh_of(cfg, domain)
    q = cfg["quadrature"]
    T = cfg["T"]
    design = builtin_set(cfg, mesh)
    runs = []
    for N in _as_list(cfg["N"]):
        modes = window_modes(domain, N)
        mass = mode_mass(mesh, modes, q)
        cross = cross_mass(mesh, modes, design, q)
        j = J(design, mass)
        gram = hum_gram(modes, T, cross)
        clustered = asymptotic_constant_clustered(modes, cross)
        rec = {
            "N": N,
            "J": j.to_dict(),
            "J_weighted": J_weighted(design, mass, gamma_weights(modes)).to_dict(),
            "randomized_wave": randomized_constant("wave", design, mass, T),
            "randomized_schrodinger": randomized_constant("schrodinger", design, mass, T),
            "asymptotic_clustered_schrodinger": clustered,
            "asymptotic_clustered_wave": 0.5 * clustered,
            "hum_lambda_min": gram.lambda_min,
            "hum_lambda_max": gram.lambda_max,
            "hum_gamma_norm": gram.gamma_norm if gram.observable else None,
            "observable_at_truncation": gram.observable,
        }
        if cfg["set"] == "comb" and domain.kind is DomainKind.INTERVAL:
            fam = omega_family_1d(cfg["set_N"], cfg["set_L"], mesh)
            rec["J_closed_form"] = min(fam.mode_mass(m.index[0]) for m in modes)
        runs.append(rec)
    _emit_field(out, "constants_set", mesh, design.values, cfg, "in_set")
    return {"problem": "constants", "domain": domain.kind.value, "bc": domain.boundary.value, "T": T,
            "set_measure": design.measure(), "runs": runs}


def cmd_cantor(cfg: dict, out: Path) -> dict:
    params = CantorParams(cfg["cantor.p"], cfg["cantor.q"], cfg["cantor.K"], cfg["cantor.b0"])
    cs = build_cantor(params)
    coeffs = cantor_coefficients(cs, cfg["cantor.n_max"])
    with open(out / "cantor_coefficients.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "a_n", "partial_sum"])
        for n, a, s in coeffs.rows():
            writer.writerow([n, repr(a), repr(s)])
    rng = np.random.default_rng(cfg["seed"])
    checks = []
    for n in sorted(int(k) for k in rng.choice(np.arange(1, cfg["cantor.n_max"] + 1),
                                               size=min(cfg["cantor.crosscheck"], cfg["cantor.n_max"]),
                                               replace=False)):
        quad = quadrature_coefficient(cs, n)
        checks.append({"n": n, "a_n": coeffs.a[n - 1], "quadrature": quad, "difference": abs(coeffs.a[n - 1] - quad)})
    mesh = build_mesh(DomainSpec(DomainKind.INTERVAL), cfg["cantor.mesh"])
    complement = cantor_optimal_complement(cs, mesh)
    _emit_field(out, "cantor_complement", mesh, complement.values, cfg, "in_set")
    payload = {
        "problem": "cantor",
        "geometry": cs.to_dict(),
        "certified": True,
        "n_max": cfg["cantor.n_max"],
        "min_coefficient": float(coeffs.a.min()),
        "partial_sum": float(coeffs.partial_sums[-1]),
        "truncation_bound_at_n_max": float(coeffs.truncation_bound[-1]),
        "crosschecks": checks,
        "complement_measure": complement.measure(),
        "expected_complement_measure": math.pi - cs.measure_half(),
    }
    if cfg["cantor.round_trip"]:
        res = solve_problem1(cantor_wave_data(coeffs), 2 * math.pi, mesh, 1 - cs.measure_half() / math.pi)
        target = doubled_complement(cs, mesh)
        payload["round_trip"] = {
            "L": res.fraction,
            "symmetric_difference_cells": res.set.symmetric_difference(target),
            "threshold": res.threshold,
        }
    return payload


def cmd_nogap(cfg: dict, out: Path) -> dict:
    domain = domain_of(cfg)
    mesh = mesh_of(cfg, domain)
    L = _as_list(cfg["L"])[0]
    N = _as_list(cfg["N"])[0]
    mass = mode_mass(mesh, window_modes(domain, N), cfg["quadrature"])
    runs = []
    last = None
    for P in cfg["blocks"]:
        s = equidistributed_set(mesh, P, L)
        j = J(s, mass)
        runs.append({"blocks": P, "J": j.value, "gap": L - j.value, "argmin": list(j.argmin),
                     "volume_defect": s.volume_defect()})
        last = s
    _emit_field(out, "nogap_set", mesh, last.values, cfg, "in_set")
    return {"problem": "nogap", "domain": domain.kind.value, "bc": domain.boundary.value, "L": L, "N": N,
            "runs": runs}


HANDLERS = {
    "problem1": cmd_problem1,
    "problem2": cmd_problem2,
    "constants": cmd_constants,
    "cantor": cmd_cantor,
    "nogap": cmd_nogap,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="obsdesign", description="Optimal observation domains on model geometries.")
    parser.add_argument("--version", action="version", version=f"obsdesign {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, default=None, help="TOML configuration file")
    parser.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (TOML value syntax), repeatable")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    cfg = None
    try:
        cfg = resolve_config(args.command, args.config, args.override)
        payload = HANDLERS[args.command](cfg, args.out)
        payload["config"] = cfg
        write_json(args.out / f"{args.command}.json", payload)
        return 0
    except ObsDesignError as exc:
        code = exc.exit_code
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code, "config": cfg}
        if getattr(exc, "offending", None) is not None:
            err["offending"] = exc.offending
    except (FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        code = 3
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code, "config": cfg}
    write_json(args.out / "error.json", err)
    print(json.dumps(_plain(err), sort_keys=True), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
