"""Command-line behaviour: outputs, exit codes, overrides, reproducibility."""

import json
import math
from pathlib import Path

import pytest

from frbe_fields.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from frbe_fields.output import read_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = {
    "model": {"alpha": 1.0, "beta": 0.5, "gamma": 1.0, "mu": 1.0},
    "spectrum": {"kappa": [0.5, 0.2, 0.6, 0.8], "w": [0.0, 0.8, 1.2, 2.0], "A": [0.0, 0.4, 0.35, 0.25]},
    "kernel": {"family": "matern", "nu": 0.5, "a": 1.0},
    "grid": {"delta": 0.01, "n_modes": 1000, "offset": 0},
    "lattice": {"t_min": 0.0, "t_max": 1.0, "t_steps": 3, "x_min": 0.0, "x_max": 2.0, "x_steps": 5},
    "seeds": {"base_seed": 7, "ensemble_size": 1},
    "run": {
        "covariance": {"series": [
            {"kind": "spatial", "t": 1, "t2": 1, "x": 0, "x2": [0, 1, 2]},
            {"kind": "temporal", "t": 1, "x": 0, "x2": 0, "t2": [0.5, 1.0]},
            {"kind": "surface", "t": 1, "x": 0, "t2": [0.5, 1.0], "x2": [0, 1]},
        ]},
        "converge": {"epsilons": [1.0, 0.5], "t": 1.0, "x": 1.0},
        "diagnostics": {"T_list": [1, 2], "H_list": [1, 2]},
    },
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "small.json"
    p.write_text(json.dumps(SMALL))
    return p


def run(*argv):
    return main([str(a) for a in argv])


def header(path):
    return Path(path).read_text().splitlines()[0]


def test_simulate_writes_field_and_meta(cfg_path, tmp_path):
    assert run("simulate", "--config", cfg_path, "--out-dir", tmp_path, "--run-id", "f", "--gnuplot") == EXIT_OK
    cols, rows = read_csv(tmp_path / "f.csv")
    assert cols == ["t", "x", "value"]
    assert len(rows) == 15
    assert all(math.isfinite(float(r[2])) for r in rows)
    meta = json.loads((tmp_path / "f.meta.json").read_text())
    assert meta["provenance"]["seeds"] == [7]
    assert (tmp_path / "f.gp").exists()


def test_simulate_ensemble_has_seed_column(cfg_path, tmp_path):
    assert run("simulate", "--config", cfg_path, "--out-dir", tmp_path, "--seeds.ensemble_size", "2") == EXIT_OK
    cols, rows = read_csv(tmp_path / "simulate.csv")
    assert cols[0] == "seed" and {r[0] for r in rows} == {"7", "8"}


def test_rerun_is_byte_identical_and_hash_in_header(cfg_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("simulate", "--config", cfg_path, "--out-dir", a) == EXIT_OK
    assert run("simulate", "--config", cfg_path, "--out-dir", b) == EXIT_OK
    assert (a / "simulate.csv").read_bytes() == (b / "simulate.csv").read_bytes()
    meta = json.loads((a / "simulate.meta.json").read_text())
    assert f"config_sha256={meta['config_sha256']}" in header(a / "simulate.csv")


def test_override_changes_hash_and_output(cfg_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("simulate", "--config", cfg_path, "--out-dir", a) == EXIT_OK
    assert run("simulate", "--config", cfg_path, "--out-dir", b, "--seeds.base_seed=8") == EXIT_OK
    assert header(a / "simulate.csv") != header(b / "simulate.csv")
    assert json.loads((b / "simulate.meta.json").read_text())["config"]["seeds"]["base_seed"] == 8


def test_covariance_files(cfg_path, tmp_path):
    assert run("covariance", "--config", cfg_path, "--out-dir", tmp_path, "--run-id", "c") == EXIT_OK
    cols, rows = read_csv(tmp_path / "c.spatial.csv")
    assert cols == ["arg", "value", "series_label"]
    vals = [float(r[1]) for r in rows]
    assert vals[0] == max(vals)
    assert len(read_csv(tmp_path / "c.temporal.csv")[1]) == 2
    cols, rows = read_csv(tmp_path / "c.surface.csv")
    assert cols == ["t2", "x2", "value", "series_label"] and len(rows) == 4


def test_covariance_threads_match_serial(cfg_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("covariance", "--config", cfg_path, "--out-dir", a) == EXIT_OK
    assert run("covariance", "--config", cfg_path, "--out-dir", b, "--threads", "2") == EXIT_OK
    assert (a / "covariance.spatial.csv").read_bytes() == (b / "covariance.spatial.csv").read_bytes()


def test_converge(cfg_path, tmp_path):
    assert run("converge", "--config", cfg_path, "--out-dir", tmp_path) == EXIT_OK
    cols, rows = read_csv(tmp_path / "converge.csv")
    assert cols == ["eps", "R_quad", "R_mc", "mc_std_err"]
    r = [float(x[1]) for x in rows]
    assert r[0] > r[1] > 0
    assert rows[0][2] == "nan"


def test_diagnostics(cfg_path, tmp_path):
    assert run("diagnostics", "--config", cfg_path, "--out-dir", tmp_path) == EXIT_OK
    holder = json.loads((tmp_path / "diagnostics.holder.json").read_text())["holder"]
    assert holder["eta_star"] == pytest.approx(1.0)
    dep = json.loads((tmp_path / "diagnostics.dependence.json").read_text())["dependence"]
    assert len(dep["time_partial_integrals"]) == 2


def test_specfun_table(tmp_path):
    code = run("specfun-table", "--out-dir", tmp_path, "--beta", "0.5", "1.0", "--s", "0", "2",
               "--nu", "0.5", "--z", "1")
    assert code == EXIT_OK
    cols, rows = read_csv(tmp_path / "specfun.mittag_leffler.csv")
    assert cols[-1] == "bound_applicable"
    flags = {(r[0], r[1]): r[-1] for r in rows}
    assert flags[("0.5", "2")] == "1" and flags[("1", "2")] == "0"
    exp = {r[1]: float(r[2]) for r in rows if r[0] == "1"}
    assert exp["2"] == pytest.approx(math.exp(-2), rel=1e-14)
    _, krows = read_csv(tmp_path / "specfun.bessel_k.csv")
    assert float(krows[0][2]) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-12)


@pytest.mark.parametrize("argv", [
    ["specfun-table", "--beta", "1.5", "--s", "1"],
    ["specfun-table", "--beta", "0.5", "--s", "-1"],
    ["specfun-table", "--nu", "1", "--z", "0"],
    ["specfun-table", "--bogus"],
])
def test_specfun_bad_arguments(argv, tmp_path):
    assert run(*argv, "--out-dir", tmp_path) == EXIT_CONFIG


@pytest.mark.parametrize("override", [
    ["--model.beta", "1.5"],
    ["--model.alpha", "-1"],
    ["--spectrum.A", "[0, -1, 0, 0]"],
    ["--grid.n_modes", "2.5"],
    ["--kernel.family", "gauss"],
    ["--bogus.key", "1"],
    ["--lattice.t_min", "-1"],
    ["--model.beta"],
    ["stray"],
])
def test_config_errors_exit_2(cfg_path, tmp_path, override, capsys):
    assert run("simulate", "--config", cfg_path, "--out-dir", tmp_path, *override) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_and_malformed_files(tmp_path):
    assert run("simulate", "--config", tmp_path / "none.json") == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("simulate", "--config", bad) == EXIT_CONFIG


def test_covariance_needs_series(cfg_path, tmp_path):
    assert run("covariance", "--config", cfg_path, "--out-dir", tmp_path, "--run.covariance", "{}") == EXIT_CONFIG


def test_narrow_grid_exits_3(cfg_path, tmp_path, capsys):
    # 20 modes of width 0.01 miss most of the spectral variance
    code = run("simulate", "--config", cfg_path, "--out-dir", tmp_path, "--grid.n_modes", "20")
    assert code == EXIT_NUMERIC
    assert "numerical error" in capsys.readouterr().err


def test_shipped_configs_load():
    from frbe_fields.config import read_config

    for name in ("example31.json", "example32.json"):
        cfg = read_config(str(CONFIGS / name))
        assert cfg.spectrum.case == ("cyclic" if name == "example31.json" else "origin")
