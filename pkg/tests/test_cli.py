import json
import math

import numpy as np
import pytest

import oracles
from diffgas.cli import main
from diffgas.config import parse_config, square_profile, with_cells
from diffgas.experiments import block_average, l1_difference, observed_orders
from diffgas.scheme import ConfigError, GridField, initialize
from diffgas.serialize import JsonLinesSink, SnapshotSink, dumps, read_snapshot, write_snapshot
from diffgas.thermo import GasConstants

BASE = """
[gas]
gamma = 1.4
gas_const = 1.0

[grid]
n_cells = {n}
x_left = {xl}
x_right = {xr}
boundary = {bc}

[scheme]
kind = {kind}
cfl = 0.45
t_end = {t}

[profile]
{profile}

[initial]
{initial}
"""


def make_config(tmp_path, name="run.ini", n=32, xl=0.0, xr=2 * math.pi, bc="periodic",
                kind="godunov", t=0.2, profile="type = cos\namplitude = 0.2",
                initial="generator = riemann-step\nx0 = 3.141592653589793\n"
                        "rho_left = 1.2\nrho_right = 0.8", extra=""):
    path = tmp_path / name
    path.write_text(BASE.format(n=n, xl=xl, xr=xr, bc=bc, kind=kind, t=t,
                                profile=profile, initial=initial) + extra)
    return path


# -- config --------------------------------------------------------------------

def test_parse_full_config(tmp_path):
    cfg = parse_config(make_config(tmp_path).read_text())
    assert cfg.constants.gamma == 1.4 and cfg.n_cells == 32
    assert cfg.initial.rho_left == 1.2 and cfg.profile.c0_bound == pytest.approx(0.6)
    assert with_cells(cfg, 64).n_cells == 64


@pytest.mark.parametrize("profile,check", [
    ("type = constant\nvalue = 0.3", lambda p: p.is_constant and p.mean == 0.3),
    ("type = multi-mode\nmodes = 1:0.2, 3:0.1:1.57", lambda p: list(p.wavenumbers) == [1, 3]),
    ("type = coefficients\ncoeffs = 0:0.1, 2:0.05+0.02j",
     lambda p: p.mean == 0.1 and p.fourier_coeffs[2] == 0.05 + 0.02j),
    ("type = square-smoothed\namplitude = 0.5\nn_modes = 16", lambda p: p.wavenumbers.size > 3),
])
def test_profile_types(tmp_path, profile, check):
    assert check(parse_config(make_config(tmp_path, profile=profile).read_text()).profile)


def test_square_profile_mean_preserving():
    p = square_profile(0.5, mean=0.1)
    y = 2 * np.pi * np.arange(512) / 512
    assert np.mean(p(y)) == pytest.approx(0.1, abs=1e-14)
    with pytest.raises(ConfigError):
        square_profile(0.5, width=1.5)


@pytest.mark.parametrize("text", [
    "[gas]\ngamma = 1.4\n",
    BASE.replace("gamma = 1.4\n", ""),
    BASE.replace("[profile]", "[bogus]"),
    "not an ini file",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text.format(n=8, xl=0, xr=1, bc="periodic", kind="godunov", t=0.1,
                                 profile="", initial="generator = uniform"))


def test_config_bad_generator_and_value(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(make_config(tmp_path, initial="generator = nope").read_text())
    with pytest.raises(ConfigError):
        parse_config(make_config(tmp_path, initial="generator = uniform\nspeed = 1").read_text())
    with pytest.raises(ConfigError):
        parse_config(make_config(tmp_path, n="many").read_text())


# -- serialisation -------------------------------------------------------------

def test_snapshot_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(1)
    n = 17
    fld = GridField(rng.uniform(0, 2, n), rng.normal(size=n), rng.normal(size=n),
                    rng.normal(size=n), 0.1 / 3, x_left=-0.3, time=1 / 7, boundary="extend")
    fld.rho[4] = 0.0
    write_snapshot(tmp_path / "s.csv", fld, GasConstants(1.4, 1.0))
    back = read_snapshot(tmp_path / "s.csv")
    for name in ("rho", "m", "S", "aux_u"):
        assert np.array_equal(getattr(back, name), getattr(fld, name))
    assert (back.dx, back.x_left, back.time, back.boundary) == (fld.dx, fld.x_left, fld.time, "extend")


def test_read_snapshot_rejects_garbage(tmp_path):
    (tmp_path / "bad.csv").write_text("x,rho\n1,2\n")
    with pytest.raises(ValueError):
        read_snapshot(tmp_path / "bad.csv")


def test_dumps_is_json_safe():
    out = json.loads(dumps({"a": np.float64(1.5), "b": np.arange(2), "c": math.inf, "d": True}))
    assert out["a"] == 1.5 and out["b"] == [0, 1] and out["d"] is True


def test_sinks(tmp_path):
    cfg = parse_config(make_config(tmp_path).read_text())
    fld, _ = initialize(cfg)
    SnapshotSink(tmp_path / "snaps", cfg.constants).snapshot(3, fld)
    assert (tmp_path / "snaps" / "snapshot_000003.csv").is_file()
    with JsonLinesSink(tmp_path / "d.jsonl") as s:
        s.record({"x": 1})
        s.record({"x": 2})
    assert [json.loads(l)["x"] for l in (tmp_path / "d.jsonl").read_text().splitlines()] == [1, 2]


# -- experiments helpers -------------------------------------------------------

def test_block_average_and_orders():
    assert np.array_equal(block_average(np.arange(6.0), 2), [0.5, 2.5, 4.5])
    with pytest.raises(ValueError):
        block_average(np.arange(5.0), 2)
    o = observed_orders([4.0, 2.0, 0.0, 0.0])
    assert o[0] == 1.0 and o[1] == math.inf and math.isnan(o[2])


def test_l1_difference_of_identical_grids():
    n = 8
    a = GridField(np.ones(n), np.zeros(n), np.zeros(n), np.zeros(n), 1 / n)
    b = GridField(np.ones(2 * n), np.zeros(2 * n), np.zeros(2 * n), np.zeros(2 * n), 0.5 / n)
    assert l1_difference(a, b) == 0.0


# -- command line --------------------------------------------------------------

def test_riemann_command_sod(tmp_path):
    rc = main(["riemann", "--left", "1,0,0", "--right", "0.125,0,0", "--gamma", "1.4",
               "--gas-const", "1", "--out-dir", str(tmp_path), "--quiet"])
    assert rc == 0
    summary = json.loads((tmp_path / "riemann.json").read_text())
    ref = float(oracles.bisect_star_pressure((1.0, 0.0, 0.0), (0.125, 0.0, 0.0), 1.4))
    assert summary["p_star"] == pytest.approx(ref, rel=1e-10)
    assert summary["wave1"] == "rarefaction" and summary["wave3"] == "shock"
    rows = (tmp_path / "riemann.csv").read_text().splitlines()
    assert rows[0] == "x,xi,rho,u,S,p" and len(rows) == 202


def test_riemann_command_vacuum(tmp_path):
    out = tmp_path / "vac.csv"
    rc = main(["riemann", "--left=1,-10,0", "--right=1,10,0", "--gamma", "2",
               "--gas-const", "1", "--out", str(out), "--quiet"])
    assert rc == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["vacuum"] is True
    rho = np.loadtxt(out, delimiter=",", skiprows=1)[:, 2]
    assert np.any(rho == 0.0)


@pytest.mark.parametrize("argv", [
    ["riemann", "--left", "1,0", "--right", "1,0,0", "--gamma", "1.4", "--gas-const", "1"],
    ["riemann", "--left=-1,0,0", "--right", "1,0,0", "--gamma", "1.4", "--gas-const", "1"],
    ["riemann", "--left", "1,0,0", "--right", "1,0,0", "--gamma", "1.0", "--gas-const", "1"],
    ["run"],
    ["bogus"],
    [],
])
def test_usage_errors(tmp_path, argv, capsys):
    assert main(argv + ["--out-dir", str(tmp_path)]) == 2


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.ini")]) == 2


def test_run_command(tmp_path):
    cfg = make_config(tmp_path, extra="\n[diagnostics]\njump_sum = true\n")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out-dir", str(out), "--quiet"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert abs(summary["mass_delta"]) < 1e-12 and abs(summary["momentum_delta"]) < 1e-12
    assert summary["ledger_ok"] is True
    lines = (out / "diagnostics.jsonl").read_text().splitlines()
    assert len(lines) == summary["steps"] + 1
    snaps = sorted(out.glob("snapshot_*.csv"))
    assert snaps[0].name == "snapshot_000000.csv"
    last = read_snapshot(snaps[-1])
    assert last.time == pytest.approx(0.2)


def test_run_uniform_has_no_growth(tmp_path):
    cfg = make_config(tmp_path, initial="generator = uniform\nrho = 1.0\nu = 0.2",
                      profile="type = constant\nvalue = 0.0")
    assert main(["--config", str(cfg), "--out-dir", str(tmp_path), "--quiet", "run"]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["mass_delta"] == 0.0 and summary["momentum_delta"] == pytest.approx(0.0, abs=1e-15)
    assert summary["max_growth_factor"] == 1.0


def test_run_zero_time_writes_one_snapshot(tmp_path):
    cfg = make_config(tmp_path, t=0.0)
    assert main(["run", str(cfg), "--out-dir", str(tmp_path), "--quiet"]) == 0
    assert [p.name for p in tmp_path.glob("snapshot_*.csv")] == ["snapshot_000000.csv"]
    assert json.loads((tmp_path / "summary.json").read_text())["steps"] == 0


def test_run_output_is_byte_deterministic(tmp_path):
    cfg = make_config(tmp_path)
    for d in ("a", "b"):
        assert main(["run", str(cfg), "--out-dir", str(tmp_path / d), "--quiet"]) == 0
    for name in ("summary.json", "diagnostics.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_failure_exit_code(tmp_path):
    cfg = make_config(tmp_path, extra="", t=0.5).read_text().replace(
        "cfl = 0.45", "cfl = 0.5\nmax_retries = 0")
    path = tmp_path / "f.ini"
    # a strong collision whose star states outrun the cell-based CFL estimate
    path.write_text(cfg.replace("rho_right = 0.8", "rho_right = 0.8\nu_left = 3\nu_right = -3"))
    assert main(["run", str(path), "--out-dir", str(tmp_path), "--quiet"]) == 1


def test_convergence_command(tmp_path):
    cfg = make_config(tmp_path, n=16, t=0.1)
    assert main(["convergence", str(cfg), "--levels", "3", "--out-dir", str(tmp_path), "--quiet"]) == 0
    table = json.loads((tmp_path / "convergence.json").read_text())
    assert table["n_cells"] == [16, 32, 64] and len(table["orders"]) == 1
    assert main(["convergence", str(cfg), "--levels", "2", "--out-dir", str(tmp_path)]) == 2


def test_convergence_of_uniform_data_reports_nan(tmp_path):
    cfg = make_config(tmp_path, n=8, t=0.1, initial="generator = uniform",
                      profile="type = constant")
    assert main(["convergence", str(cfg), "--levels", "3", "--out-dir", str(tmp_path), "--quiet"]) == 0
    table = json.loads((tmp_path / "convergence.json").read_text())
    assert table["errors"] == [0.0, 0.0] and table["orders"] == ["nan"]


def test_decay_command_checks_mass_period(tmp_path):
    cfg = make_config(tmp_path, xr=math.pi)
    assert main(["decay", str(cfg), "--out-dir", str(tmp_path), "--quiet"]) == 2
    cfg = make_config(tmp_path, bc="extend")
    assert main(["decay", str(cfg), "--out-dir", str(tmp_path), "--quiet"]) == 2


def test_decay_command(tmp_path):
    cfg = make_config(tmp_path, t=1.0)
    assert main(["decay", str(cfg), "--out-dir", str(tmp_path), "--quiet"]) == 0
    summary = json.loads((tmp_path / "decay_summary.json").read_text())
    assert summary["final"] < summary["initial"]
    rows = (tmp_path / "decay.csv").read_text().splitlines()
    assert rows[0] == "t,decay_L1" and len(rows) == summary["steps"] + 2
