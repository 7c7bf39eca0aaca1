import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from obsdesign._threads import apply_thread_cap
from obsdesign.cli import main
from obsdesign.config import resolve_config


def run(tmp_path, command, *overrides, name="out", config=None):
    out = tmp_path / name
    argv = [command, "--out", str(out)]
    if config is not None:
        argv += ["--config", str(config)]
    for o in overrides:
        argv += ["--override", o]
    code = main(argv)
    fname = f"{command}.json" if code == 0 else "error.json"
    return code, json.loads((out / fname).read_text()), out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


SQUARE = 'domain="Square2D"'


# ------------------------------------------------------------------ problem 1


def test_preset1_fraction(tmp_path):
    code, res, out = run(tmp_path, "problem1", SQUARE, 'data.preset="preset1"', "L=0.6", "T=3.0")
    assert code == 0
    r = res["runs"][0]
    cell = math.pi**2 / 256**2
    assert abs(r["fraction"] - 0.6) * math.pi**2 <= cell
    rows = read_csv(out / "problem1_L0.6_set.csv")
    assert rows[0] == ["cell_id", "x1", "x2", "measure", "in_set"]
    assert len(rows) == 256 * 256 + 1
    assert read_csv(out / "problem1_L0.6_phi.csv")[0][-1] == "phi"
    # the preset is symmetric under x1 <-> x2; only the tie layer may break it
    bits = np.zeros(256 * 256, bool)
    bits[r["set_cells"]] = True
    grid = bits.reshape(256, 256)
    assert np.count_nonzero(grid != grid.T) <= r["tie_cells"]


def test_preset2_symmetries(tmp_path):
    code, res, _ = run(tmp_path, "problem1", SQUARE, 'data.preset="preset2"', "L=0.6", "T=3.0", "resolution=128")
    assert code == 0
    r = res["runs"][0]
    bits = np.zeros(128 * 128, bool)
    bits[r["set_cells"]] = True
    grid = bits.reshape(128, 128)
    assert np.count_nonzero(grid != grid.T) <= r["tie_cells"]
    assert np.count_nonzero(grid != grid[::-1, ::-1]) <= r["tie_cells"]


def test_preset2_density_is_not_reflection_symmetric(tmp_path):
    # only modes with n + k odd carry data, so x1 -> pi - x1 flips the sign of
    # some modes and not others; the energy density changes
    code, res, out = run(tmp_path, "problem1", SQUARE, 'data.preset="preset2"', "L=0.6", "T=3.0", "resolution=64")
    assert code == 0
    phi = np.array([float(r[-1]) for r in read_csv(out / "problem1_L0.6_phi.csv")[1:]]).reshape(64, 64)
    assert np.max(np.abs(phi - phi[::-1, :])) > 1e-3 * np.max(phi)
    assert np.allclose(phi, phi[::-1, ::-1], rtol=1e-9, atol=1e-12 * np.max(phi))


def test_zero_data_exit_code(tmp_path):
    code, err, _ = run(tmp_path, "problem1", "data.a=[0.0, 0.0]", "data.b=[0.0, 0.0]", "resolution=64")
    assert code == 3
    assert err["error"] == "DegenerateDesignError"
    assert err["config"]["data.a"] == [0.0, 0.0]


def test_inline_wave_data(tmp_path):
    code, res, _ = run(tmp_path, "problem1", 'data.preset="single_mode"', "L=0.5", "resolution=4096",
                       f"T={2 * math.pi!r}")
    assert code == 0
    cells = np.array(res["runs"][0]["set_cells"])
    x = (cells + 0.5) * math.pi / 4096
    assert x.min() == pytest.approx(math.pi / 4, abs=2 * math.pi / 4096)
    assert x.max() == pytest.approx(3 * math.pi / 4, abs=2 * math.pi / 4096)


# ------------------------------------------------------------------ problem 2


def test_problem2_square(tmp_path):
    code, res, out = run(tmp_path, "problem2", SQUARE, "N=2", "L=0.2", "resolution=64", "quadrature=3")
    assert code == 0
    r = res["runs"][0]
    assert r["converged"] and r["gap"] <= 1e-6
    assert abs(sum(r["alpha"]) - 1) <= 1e-12
    assert (out / "problem2_N2_L0.2_field.csv").exists()
    for key in ("value", "threshold", "set_cells", "iterations", "converged", "alpha"):
        assert key in r


def test_problem2_weighted_sweep(tmp_path):
    code, res, _ = run(tmp_path, "problem2", "N=[1, 3]", "L=0.9", "weighted=true", "stationarity=true",
                       "n_max=4", "resolution=512")
    assert code == 0
    assert len(res["runs"]) == 2
    sweep = res["stationarity"][0]
    assert sweep["N0"] is not None and sweep["certified"]


# ------------------------------------------------------------------ constants


def test_constants_half_square(tmp_path):
    code, res, out = run(tmp_path, "constants", SQUARE, "N=3", "T=2.0", "resolution=64", "quadrature=3")
    assert code == 0
    r = res["runs"][0]
    assert r["J"]["value"] == pytest.approx(0.5, abs=1e-3)
    assert r["asymptotic_clustered_schrodinger"] == pytest.approx(0.5, abs=1e-3)
    assert r["asymptotic_clustered_wave"] == pytest.approx(0.25, abs=1e-3)
    assert r["randomized_wave"] == pytest.approx(0.5, abs=1e-3)
    assert r["randomized_schrodinger"] == pytest.approx(1.0, abs=2e-3)
    assert read_csv(out / "constants_set.csv")[0][-1] == "in_set"


def test_constants_full_set(tmp_path):
    code, res, _ = run(tmp_path, "constants", SQUARE, "N=2", 'set="full"', "resolution=64", "quadrature=3")
    assert code == 0
    assert res["runs"][0]["J"]["value"] == pytest.approx(1.0, abs=1e-3)
    assert res["runs"][0]["observable_at_truncation"]


def test_constants_comb_closed_form(tmp_path):
    code, res, _ = run(tmp_path, "constants", "N=12", 'set="comb"', "set_N=5", "set_L=0.3",
                       "resolution=6000", "quadrature=3")
    assert code == 0
    r = res["runs"][0]
    assert r["J"]["value"] == pytest.approx(r["J_closed_form"], abs=2e-3)


def test_constants_set_file(tmp_path):
    code, _, out = run(tmp_path, "constants", SQUARE, "N=2", "resolution=32", name="first")
    assert code == 0
    path = out / "constants_set.csv"
    code, again, _ = run(tmp_path, "constants", SQUARE, "N=2", "resolution=32", f'set="{path}"', name="second")
    assert code == 0
    assert again["runs"][0]["J"]["value"] == pytest.approx(0.5, abs=1e-2)


# --------------------------------------------------------------------- cantor


def test_cantor_certified(tmp_path):
    code, res, out = run(tmp_path, "cantor", "cantor.round_trip=false")
    assert code == 0
    assert res["certified"] and res["min_coefficient"] > 0
    assert len(res["crosschecks"]) == 10
    assert max(c["difference"] for c in res["crosschecks"]) <= 1e-8
    rows = read_csv(out / "cantor_coefficients.csv")
    assert rows[0] == ["n", "a_n", "partial_sum"] and len(rows) == 5001


@pytest.mark.parametrize("p,q", [(2, 4), (1, 2)])
def test_cantor_rejects_params(tmp_path, p, q):
    code, err, _ = run(tmp_path, "cantor", f"cantor.p={p}", f"cantor.q={q}")
    assert code == 2
    assert err["error"] == "ConfigurationError"


def test_cantor_certification_exit_code(tmp_path):
    code, err, _ = run(tmp_path, "cantor", "cantor.p=3", "cantor.q=11", "cantor.K=4")
    assert code == 4
    assert err["error"] == "CertificationError"


# ----------------------------------------------------------------------- nogap


def test_nogap(tmp_path):
    code, res, _ = run(tmp_path, "nogap", "L=0.3", "N=20", "resolution=6400", "quadrature=3")
    assert code == 0
    js = [r["J"] for r in res["runs"]]
    assert [r["blocks"] for r in res["runs"]] == [8, 16, 32, 64]
    assert all(b >= a - 1e-12 for a, b in zip(js, js[1:]))
    assert 0.3 - js[-1] <= 0.02


# ---------------------------------------------------------------- config & io


def test_unknown_key(tmp_path):
    code, err, _ = run(tmp_path, "problem2", "colour=1")
    assert code == 2 and "colour" in err["message"]


@pytest.mark.parametrize("override", ["L=1.5", "N=0", "T=-1.0", 'domain="Cube3D"', "quadrature=5", "tol=0.0",
                                      'data.preset="nope"', "L"])
def test_validation_errors(tmp_path, override):
    code, err, _ = run(tmp_path, "problem2", override)
    assert code == 2
    assert err["exit_code"] == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('domain = "Square2D"\nN = 2\nL = 0.4\nresolution = 32\n[data]\nequation = "wave"\n')
    code, res, _ = run(tmp_path, "problem2", "L=0.2", config=cfg)
    assert code == 0
    assert res["config"]["N"] == 2 and res["config"]["L"] == 0.2  # override beats file
    assert res["config"]["resolution"] == 32
    assert res["config"]["command"] == "problem2"
    assert set(resolve_config("problem2")) == set(res["config"])


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("N = [\n")
    code, _, _ = run(tmp_path, "problem2", config=cfg)
    assert code == 2
    code, _, _ = run(tmp_path, "problem2", config=tmp_path / "missing.toml", name="o2")
    assert code == 2


def test_byte_identical_outputs(tmp_path):
    args = ("problem2", SQUARE, "N=2", "L=0.4", "resolution=32")
    run(tmp_path, *args, name="a")
    run(tmp_path, *args, name="b")
    for f in ("problem2.json", "problem2_N2_L0.4_field.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_grid_files(tmp_path):
    code, _, out = run(tmp_path, "problem1", SQUARE, 'data.preset="preset1"', "resolution=16", "grid=true")
    assert code == 0
    grid = np.loadtxt(out / "problem1_L0.5_set.dat")
    assert grid.shape == (16, 16)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("OBSDESIGN_THREADS", "2")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    assert apply_thread_cap() == 2
    assert os.environ["OMP_NUM_THREADS"] == "2"
    monkeypatch.setenv("OBSDESIGN_THREADS", "zero")
    assert apply_thread_cap() is None


def test_console_entry_point(tmp_path):
    env = dict(os.environ, OBSDESIGN_THREADS="1")
    proc = subprocess.run(
        [sys.executable, "-m", "obsdesign.cli", "nogap", "--out", str(tmp_path), "--override", "resolution=512"],
        capture_output=True, text=True, env=env, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads((tmp_path / "nogap.json").read_text())["problem"] == "nogap"
    bad = subprocess.run(
        [sys.executable, "-m", "obsdesign.cli", "cantor", "--out", str(tmp_path), "--override", "cantor.q=4"],
        capture_output=True, text=True, env=env, check=False,
    )
    assert bad.returncode == 2
    assert json.loads(bad.stderr)["error"] == "ConfigurationError"
