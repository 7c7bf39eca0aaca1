"""Run configuration: TOML file plus ``key=value`` overrides, validated before dispatch."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _toml

from .domains import Boundary, DomainKind
from .errors import ConfigurationError

COMMANDS = ("problem1", "problem2", "constants", "cantor", "nogap")


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _int_or_list(v):
    return _int(v) or (isinstance(v, list) and bool(v) and all(_int(x) for x in v))


def _num_or_list(v):
    return _number(v) or (isinstance(v, list) and bool(v) and all(_number(x) for x in v))


def _num_list(v):
    return isinstance(v, list) and all(_number(x) for x in v)


def _opt_str(v):
    return v is None or isinstance(v, str)


# dotted key -> (default, type check, description)
SCHEMA: dict[str, tuple[Any, Any, str]] = {
    "domain": ("Interval1D", lambda v: v in {k.value for k in DomainKind}, "domain kind"),
    "boundary": ("Dirichlet", lambda v: v in {b.value for b in Boundary}, "boundary condition"),
    "resolution": (None, lambda v: v is None or _int_or_list(v), "cells per axis (default: reference mesh)"),
    "quadrature": (1, lambda v: v in (1, 2, 3), "Gauss points per axis"),
    "L": (0.5, _num_or_list, "volume fraction(s)"),
    "N": (1, _int_or_list, "truncation window(s)"),
    "T": (2 * math.pi, _number, "time horizon"),
    "tol": (1e-6, _number, "duality-gap tolerance"),
    "max_iter": (0, _int, "iteration cap (0: automatic)"),
    "weighted": (False, lambda v: isinstance(v, bool), "use gamma weights"),
    "symmetric": (True, lambda v: isinstance(v, bool), "average optimal fields over symmetries"),
    "stationarity": (False, lambda v: isinstance(v, bool), "run the stationarity sweep"),
    "n_max": (10, _int, "largest window of the stationarity sweep"),
    "grid": (False, lambda v: isinstance(v, bool), "also write whitespace grid files"),
    "seed": (0, _int, "random seed"),
    "set": ("half", lambda v: isinstance(v, str), "design for constants: half|full|empty|comb|<csv path>"),
    "set_N": (5, _int, "comb family size"),
    "set_L": (0.3, _number, "comb family fraction"),
    "blocks": ([8, 16, 32, 64], lambda v: isinstance(v, list) and v and all(_int_or_list(x) for x in v),
               "macro-block counts"),
    "data.equation": ("wave", lambda v: v in ("wave", "schrodinger"), "equation"),
    "data.preset": (None, _opt_str, "single_mode|preset1|preset2"),
    "data.modes": (15, _int, "per-axis window of preset data"),
    "data.a": ([], _num_list, "wave coefficients a_j (real)"),
    "data.b": ([], _num_list, "wave coefficients b_j (real)"),
    "data.c": ([], _num_list, "Schrodinger coefficients c_j (real)"),
    "cantor.p": (1, _int, "numerator of alpha"),
    "cantor.q": (5, _int, "denominator of alpha"),
    "cantor.K": (8, _int, "number of peaks"),
    "cantor.b0": (1.0, _number, "base height"),
    "cantor.n_max": (5000, _int, "largest certified coefficient"),
    "cantor.crosscheck": (10, _int, "random quadrature cross-checks"),
    "cantor.mesh": (8192, _int, "cells of the round-trip mesh"),
    "cantor.round_trip": (True, lambda v: isinstance(v, bool), "run the level-set round trip"),
}


def _flatten(tree: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigurationError(f"override '{text}' is not of the form key=value")
    key, raw = (s.strip() for s in text.split("=", 1))
    try:
        value = _toml.loads(f"v = {raw}")["v"]
    except _toml.TOMLDecodeError:
        value = raw
    return key, value


def resolve_config(command: str, path: str | Path | None = None, overrides=()) -> dict:
    """Defaults, then the file, then overrides; unknown keys and bad values raise."""
    if command not in COMMANDS:
        raise ConfigurationError(f"unknown command '{command}'")
    values = {k: v[0] for k, v in SCHEMA.items()}
    given: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                given.update(_flatten(_toml.load(fh)))
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        except _toml.TOMLDecodeError as exc:
            raise ConfigurationError(f"invalid TOML in {path}: {exc}") from exc
    for item in overrides:
        key, value = parse_override(item)
        given[key] = value
    unknown = sorted(set(given) - set(SCHEMA))
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in given.items():
        if isinstance(value, int) and not isinstance(value, bool) and isinstance(SCHEMA[key][0], float):
            value = float(value)
        if not SCHEMA[key][1](value):
            raise ConfigurationError(f"invalid value for {key}: {value!r} ({SCHEMA[key][2]})")
        values[key] = value
    _check_ranges(values)
    values["command"] = command
    return dict(sorted(values.items()))


def _check_ranges(v: dict) -> None:
    for L in (v["L"] if isinstance(v["L"], list) else [v["L"]]):
        if not 0 < L < 1:
            raise ConfigurationError(f"volume fraction L={L} must lie in (0, 1)")
    for n in (v["N"] if isinstance(v["N"], list) else [v["N"]]):
        if n < 1:
            raise ConfigurationError(f"window N={n} must be >= 1")
    if not v["T"] > 0:
        raise ConfigurationError("time horizon T must be positive")
    if not v["tol"] > 0:
        raise ConfigurationError("tol must be positive")
    if v["max_iter"] < 0:
        raise ConfigurationError("max_iter must be >= 0")
    if v["n_max"] < 2:
        raise ConfigurationError("n_max must be >= 2")
    res = v["resolution"]
    if res is not None and any(r < 1 for r in (res if isinstance(res, list) else [res])):
        raise ConfigurationError("resolution must be >= 1 per axis")
    if not 0 < v["set_L"] < 1 or v["set_N"] < 1:
        raise ConfigurationError("comb family needs set_N >= 1 and set_L in (0, 1)")
    if v["cantor.n_max"] < 1 or v["cantor.crosscheck"] < 0 or v["cantor.mesh"] < 4096:
        raise ConfigurationError("cantor needs n_max >= 1, crosscheck >= 0 and mesh >= 4096")
    if v["data.modes"] < 1:
        raise ConfigurationError("data.modes must be >= 1")
    if v["data.preset"] not in (None, "single_mode", "preset1", "preset2"):
        raise ConfigurationError(f"unknown data preset {v['data.preset']!r}")
