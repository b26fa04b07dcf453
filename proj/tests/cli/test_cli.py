import csv
import json

import numpy as np
import pytest


def read_cmx(path):
    tokens = path.read_text().split()
    assert tokens[0] == "CMX"
    rows, cols = int(tokens[1]), int(tokens[2])
    values = np.array([float(t) for t in tokens[3:]])
    assert values.size == 2 * rows * cols
    return (values[0::2] + 1j * values[1::2]).reshape(rows, cols)


def error_of(proc):
    return json.loads(proc.stderr.strip().splitlines()[-1])


def write_config(tmp_path, **cfg):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


# -- compile -----------------------------------------------------------------

def test_compile_five_mode_fixture(run, fixtures, tmp_path, schemas):
    proc = run("compile", fixtures / "five_mode_netlist.json", "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    topo = json.loads((tmp_path / "topology.json").read_text())
    schemas(topo, "topology")
    assert topo["depth"] == 4
    assert [c["active"] for c in topo["columns"]] == [2, 2, 2, 1]
    assert "depth 4" in proc.stdout


def test_compile_rectangular_netlist(run, fixtures, tmp_path):
    proc = run("compile", fixtures / "rect6_netlist.json", "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert json.loads((tmp_path / "topology.json").read_text())["depth"] == 6


def test_compile_architecture_flag(run, tmp_path):
    proc = run("compile", "--arch", "butterfly", "--n", 16, "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert json.loads((tmp_path / "topology.json").read_text())["depth"] == 4


def test_compile_cycle_reports_nodes(run, fixtures, schemas):
    proc = run("compile", fixtures / "cycle2_netlist.json")
    assert proc.returncode == 2
    err = error_of(proc)
    schemas(err, "error")
    assert err["error"]["type"] == "CycleError"
    assert sorted(err["error"]["nodes"]) == [10, 20]


def test_netlist_fixtures_match_schema(fixtures, schemas):
    for name in ["five_mode_netlist.json", "cycle2_netlist.json", "rect6_netlist.json", "single_node_netlist.json"]:
        schemas(json.loads((fixtures / name).read_text()), "netlist")


# -- random / decompose ---------------------------------------------------------

def test_random_haar_is_unitary_and_deterministic(run, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("random", "--kind", "haar", "--n", 64, "--seed", 5, "--out", d).returncode == 0
    assert (a / "haar.cmx").read_bytes() == (b / "haar.cmx").read_bytes()
    u = read_cmx(a / "haar.cmx")
    assert np.linalg.norm(u.conj().T @ u - np.eye(64)) < 1e-12
    c = tmp_path / "c"
    run("random", "--kind", "haar", "--n", 64, "--seed", 6, "--out", c)
    assert (a / "haar.cmx").read_bytes() != (c / "haar.cmx").read_bytes()


def test_cmx_output_has_17_significant_digits(run, tmp_path):
    run("random", "--kind", "haar", "--n", 4, "--seed", 1, "--out", tmp_path)
    for token in (tmp_path / "haar.cmx").read_text().split()[3:]:
        mantissa = token.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
        assert len(mantissa) >= 15  # %.17g drops trailing zeros only


def test_random_phase_params(run, tmp_path, schemas):
    proc = run("random", "--kind", "phase-random", "--arch", "triangular", "--n", 6, "--seed", 2, "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    params = json.loads((tmp_path / "params.json").read_text())
    schemas(params, "params")
    assert params["architecture"] == "triangular"


def test_decompose_identity(run, fixtures, tmp_path, schemas):
    proc = run("decompose", fixtures / "identity4.cmx", "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    err = float(proc.stdout.split("rebuild_error")[1].split()[0])
    assert err < 1e-12
    schemas(json.loads((tmp_path / "params.json").read_text()), "params")


def test_decompose_haar64(run, tmp_path):
    run("random", "--kind", "haar", "--n", 64, "--seed", 3, "--out", tmp_path)
    proc = run("decompose", tmp_path / "haar.cmx", "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert float(proc.stdout.split("rebuild_error")[1].split()[0]) < 1e-9


def test_decompose_non_unitary(run, fixtures, schemas):
    proc = run("decompose", fixtures / "nonunitary2.cmx")
    assert proc.returncode == 2
    err = error_of(proc)
    schemas(err, "error")
    assert err["error"]["type"] == "NonUnitaryError"
    assert err["error"]["deviation"] > 1e-3


def test_decompose_malformed_file(run, tmp_path):
    bad = tmp_path / "bad.cmx"
    bad.write_text("CMX 2 2\n1 0 0\n")
    proc = run("decompose", bad)
    assert proc.returncode == 1
    assert error_of(proc)["error"]["type"] == "ParseError"


# -- nullset -------------------------------------------------------------------

@pytest.mark.parametrize("preset", ["bar", "cross", "phase-random", "haar-random"])
def test_nullset_presets(run, tmp_path, preset):
    proc = run("nullset", "--preset", preset, "--n", 16, "--seed", 4, "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    w = read_cmx(tmp_path / "nullset.cmx")
    assert w.shape == (16, 16)
    with open(tmp_path / "nullset_power.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["column"] + [f"mode{i}" for i in range(16)]
    grid = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    assert np.allclose(grid, np.abs(w) ** 2, atol=1e-15)
    assert np.allclose(grid.sum(axis=1), 8.0)
    assert float(proc.stdout.split("identity_error")[1].split()[0]) < 1e-10


def test_nullset_from_params(run, tmp_path):
    run("random", "--kind", "phase-random", "--arch", "butterfly", "--n", 8, "--seed", 1, "--out", tmp_path)
    proc = run("nullset", tmp_path / "params.json", "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    assert read_cmx(tmp_path / "nullset.cmx").shape == (3, 8)


def test_power_map_mirror_structure(run, tmp_path):
    maps = {}
    for preset in ("bar", "cross"):
        d = tmp_path / preset
        assert run("nullset", "--preset", preset, "--n", 64, "--out", d).returncode == 0
        maps[preset] = np.abs(read_cmx(d / "nullset.cmx")) ** 2
    # cross map: reversing the mode axis complements every row
    assert np.abs(maps["cross"] + maps["cross"][:, ::-1] - 1.0).max() < 1e-10
    # bar map: a fixed checkerboard, period two in the column index
    assert np.abs(maps["bar"][2:] - maps["bar"][:-2]).max() < 1e-10
    assert np.abs(maps["bar"] + maps["bar"][:, ::-1] - 1.0).max() < 1e-10


# -- program -------------------------------------------------------------------

def test_program_n8_closed_form(run, tmp_path, schemas):
    cfg = write_config(tmp_path, n=8, seed=1, target={"kind": "haar"})
    proc = run("program", "--config", cfg, "--out", tmp_path / "out")
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    schemas(report, "report")
    assert report["report"]["fidelity_after"] > 1 - 1e-9
    assert report["report"]["inputs_consumed"] == 8
    assert report["aligned_distance"] < 1e-8


def test_program_drift_repair_n64(run, tmp_path):
    cfg = write_config(tmp_path, n=64, seed=4, initial="target", error_model={"drift_sigma": 0.05})
    proc = run("program", "--config", cfg, "--out", tmp_path / "out")
    assert proc.returncode == 0, proc.stderr
    r = json.loads((tmp_path / "out" / "report.json").read_text())["report"]
    assert r["fidelity_before"] < r["fidelity_after"]
    assert r["fidelity_after"] > 1 - 1e-8
    assert r["distance_after"] < 1e-8


def test_program_sweep_matches_closed_form(run, tmp_path):
    out = {}
    for mode in ("closed-form", "sweep"):
        cfg = write_config(tmp_path, n=8, seed=2)
        assert run("program", "--config", cfg, "--mode", mode, "--out", tmp_path / mode).returncode == 0
        out[mode] = json.loads((tmp_path / mode / "report.json").read_text())["report"]
    for r in out.values():
        assert r["max_alpha_error"] < 1e-8
        assert r["max_beta_error"] < 1e-8
    assert out["sweep"]["mode"] == "sweep"


def test_program_is_byte_deterministic(run, tmp_path):
    cfg = write_config(tmp_path, n=16, seed=9, error_model={"drift_sigma": 0.02})
    for d in ("a", "b"):
        assert run("program", "--config", cfg, "--out", tmp_path / d).returncode == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_program_split_ratio_limit_flags(run, tmp_path, schemas):
    cfg = write_config(tmp_path, n=8, seed=1, error_model={"theta_min": 0.3})
    proc = run("program", "--config", cfg, "--out", tmp_path / "out")
    assert proc.returncode == 2
    schemas(error_of(proc), "error")
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    schemas(report, "report")
    assert report["error"]["type"] == "NonNullifiableError"
    assert report["report"]["flagged_nodes"] > 0
    assert not report["report"]["success"]


def test_program_netlist_architecture(run, fixtures, tmp_path):
    cfg = write_config(tmp_path, architecture=f"netlist:{fixtures / 'five_mode_netlist.json'}", n=5,
                       target={"kind": "phase-random"})
    proc = run("program", "--config", cfg, "--out", tmp_path / "out")
    assert proc.returncode == 0, proc.stderr
    assert json.loads((tmp_path / "out" / "report.json").read_text())["depth"] == 4


def test_config_hash_tracks_config(run, tmp_path):
    hashes = set()
    for seed in (1, 1, 2):
        cfg = write_config(tmp_path, n=4, seed=seed)
        run("program", "--config", cfg, "--out", tmp_path / "out")
        hashes.add(json.loads((tmp_path / "out" / "report.json").read_text())["config_hash"])
    assert len(hashes) == 2


@pytest.mark.parametrize("cfg", [{"n": 4, "sed": 1}, {"error_model": {"sigma": 0.1}}, {"n": "four"},
                                 {"target": {"kind": "mystery"}}])
def test_config_rejected(run, tmp_path, cfg, schemas):
    path = write_config(tmp_path, **cfg)
    proc = run("program", "--config", path)
    assert proc.returncode == 1
    err = error_of(proc)
    schemas(err, "error")
    assert err["error"]["type"] == "ConfigError"


# -- calibrate -----------------------------------------------------------------

def test_calibrate_n8(run, tmp_path, schemas):
    proc = run("calibrate", "--n", 8, "--seed", 3, "--out", tmp_path)
    assert proc.returncode == 0, proc.stderr
    doc = json.loads((tmp_path / "calibration.json").read_text())
    schemas(doc, "calibration")
    assert doc["verification"]["max_relative_coefficient_error"] < 1e-6
    assert doc["verification"]["flash_fidelity"] > 1 - 1e-6
    assert len(doc["calibration"]["shifters"]) == 2 * 28


def test_calibrate_short_drive_range(run, tmp_path):
    cfg = write_config(tmp_path, n=4, calibration={"drive_min": 0.0, "drive_max": 1.0})
    proc = run("calibrate", "--config", cfg, "--out", tmp_path)
    assert proc.returncode == 2
    assert error_of(proc)["error"]["type"] == "RangeError"


# -- speedup / usage -------------------------------------------------------------

def test_speedup_table(run):
    proc = run("speedup", "--n", 64)
    assert proc.returncode == 0
    rows = list(csv.reader(proc.stdout.strip().splitlines()))
    assert rows[0] == ["architecture", "n", "nodes", "depth", "ratio"]
    table = {r[0]: (int(r[2]), int(r[3]), float(r[4])) for r in rows[1:]}
    assert table["rectangular"] == (2016, 64, 31.5)
    assert table["triangular"] == (2016, 125, 16.128)
    assert table["butterfly"] == (192, 6, 32.0)


@pytest.mark.parametrize("args", [[], ["frobnicate"], ["program", "--mode", "fast"], ["speedup", "--n", "x"],
                                  ["speedup", "--arch", "hexagonal"], ["nullset"]])
def test_usage_errors_exit_1(run, args):
    assert run(*args).returncode == 1


def test_log_level_from_environment(run, tmp_path):
    quiet = run("speedup", "--n", 8)
    loud = run("program", "--n", 4, "--out", tmp_path, env={"MESHFORGE_LOG": "debug"})
    assert quiet.stderr == ""
    assert loud.returncode == 0
    assert "programming" in loud.stderr
