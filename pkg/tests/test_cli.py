"""End-to-end command-line interface tests, run in-process via main(argv)."""

import json
import math

import numpy as np
import pytest

from spinpump.cli import main, parse_quantity, quantity, ConfigError
from spinpump.io import TRAJECTORY_HEADER


def _base_config(**over):
    doc = {
        "params": {
            "omega_B": {"value": 0.05, "unit": "rad/s"},
            "Omega": {"value": 0.05, "unit": "rad/s"},
            "gamma_e": {"value": 1.0, "unit": "rad/s"},
            "gamma": {"value": 1e-4, "unit": "1/s"},
        },
        "schedule": {
            "omega": {"value": 0.05, "unit": "rad/s"},
            "profile": {"kind": "constant", "theta": 0.2},
        },
        "integrator": {"t_final": 200.0, "n_samples": 21},
    }
    doc.update(over)
    return doc


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# --- unit-keyed quantities ---------------------------------------------------


def test_parse_quantity_units():
    assert parse_quantity({"value": 2.0, "unit": "rad/s"}, "x") == 2.0
    assert parse_quantity({"value": 1.0, "unit": "(2pi)kHz"}, "x") == pytest.approx(
        2 * math.pi * 1e3
    )
    for bad in (3.0, {"value": 1.0}, {"value": 1.0, "unit": "Hz"},
                {"value": "a", "unit": "rad/s"},
                {"value": float("inf"), "unit": "rad/s"},
                {"value": 1.0, "unit": "rad/s", "extra": 0}):
        with pytest.raises(ConfigError):
            parse_quantity(bad, "x")


def test_quantity_round_trip_short_decimal():
    q = quantity(2 * math.pi * 10.2e3, "(2pi)kHz")
    assert q == {"value": 10.2, "unit": "(2pi)kHz"}
    assert parse_quantity(q, "x") == pytest.approx(2 * math.pi * 10.2e3, rel=1e-12)


# --- trajectory runs ---------------------------------------------------------


def test_master_run_creates_csv_and_json(tmp_path, capsys):
    cfg = _write(tmp_path, _base_config())
    rc = main(["master", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    printed = capsys.readouterr().out.splitlines()
    assert str(tmp_path / "master.csv") in printed
    assert str(tmp_path / "master.json") in printed

    lines = (tmp_path / "master.csv").read_text().splitlines()
    assert lines[0] == TRAJECTORY_HEADER
    assert lines[0] == "t,Fx,Fy,Fz,Fzz,Azx,Azy,rho_ee,trace,fid_dplus,fid_dminus"
    assert len(lines) == 1 + 21
    first = lines[1].split(",")
    assert len(first) == 11
    assert float(first[0]) == 0.0
    assert float(first[8]) == pytest.approx(1.0)  # trace of the initial state

    doc = json.loads((tmp_path / "master.json").read_text())
    assert set(doc) == {"config", "results", "diagnostics", "version"}
    assert doc["config"]["schedule"]["profile"]["theta"] == 0.2
    assert len(doc["results"]["t"]) == 21
    assert doc["diagnostics"]["engine"] == "master"


def test_bloch_csv_has_empty_master_fields(tmp_path):
    cfg = _write(tmp_path, _base_config())
    assert main(["bloch", "--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "bloch.csv").read_text().splitlines()
    assert lines[0] == TRAJECTORY_HEADER
    cells = lines[-1].split(",")
    assert len(cells) == 11
    assert cells[7:] == ["", "", "", ""]  # no rho_ee/trace/fidelities in reduced model


def test_csv_uses_17_significant_digits(tmp_path):
    cfg = _write(tmp_path, _base_config())
    assert main(["master", "--config", cfg, "--out", str(tmp_path)]) == 0
    body = (tmp_path / "master.csv").read_text().splitlines()[1:]
    # round-tripping every numeric cell through repr must be lossless
    for line in body:
        for cell in line.split(","):
            if cell:
                x = float(cell)
                assert f"{x:.17g}" == f"{float(f'{x:.17g}'):.17g}"


def test_svg_output(tmp_path):
    cfg = _write(tmp_path, _base_config())
    rc = main(["master", "--config", cfg, "--out", str(tmp_path),
               "--format", "svg"])
    assert rc == 0
    svg = (tmp_path / "master.svg").read_text()
    assert svg.lstrip().startswith("<?xml")
    assert "svg" in svg


def test_fixed_step_runs_are_bit_identical(tmp_path):
    doc = _base_config()
    doc["integrator"].update(method="rk4", fixed_dt=0.25)
    cfg = _write(tmp_path, doc)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["master", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["master", "--config", cfg, "--out", str(out2)]) == 0
    assert (out1 / "master.csv").read_bytes() == (out2 / "master.csv").read_bytes()


# --- scans, passage, compare -------------------------------------------------


def test_scan_omega_cli(tmp_path):
    doc = _base_config(engine="bloch")
    del doc["integrator"]
    doc["scan"] = {
        "parameter": "omega",
        "start": {"value": -0.1, "unit": "rad/s"},
        "stop": {"value": 0.1, "unit": "rad/s"},
        "n": 9,
        "t_final": 500.0,
    }
    cfg = _write(tmp_path, doc)
    assert main(["scan-omega", "--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "scan_omega.csv").read_text().splitlines()
    assert lines[0] == "omega,Fz,failed"
    assert len(lines) == 10
    doc_out = json.loads((tmp_path / "scan_omega.json").read_text())
    assert len(doc_out["results"]["omega"]) == 9
    assert doc_out["diagnostics"]["n_failed"] == 0


def test_scan_theta_cli_with_values(tmp_path):
    doc = _base_config(engine="bloch")
    del doc["integrator"]
    doc["scan"] = {"parameter": "theta", "values": [0.1, 0.2, 0.3],
                   "t_final": 500.0}
    cfg = _write(tmp_path, doc)
    assert main(["scan-theta", "--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "scan_theta.csv").read_text().splitlines()
    assert lines[0] == "theta,Fz,failed"
    assert [float(l.split(",")[0]) for l in lines[1:]] == [0.1, 0.2, 0.3]


def test_passage_cli(tmp_path):
    doc = _base_config()
    del doc["schedule"]
    doc["passage"] = {"T": 500.0}
    doc["integrator"] = {"t_final": 500.0, "n_samples": 11}
    cfg = _write(tmp_path, doc)
    assert main(["passage", "--config", cfg, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "passage.csv").read_text().splitlines()
    assert len(lines) == 12


def test_compare_cli(tmp_path, capsys):
    doc = _base_config()
    doc["schedule"]["profile"]["theta"] = 0.1  # inside the reduced-model regime
    cfg = _write(tmp_path, doc)
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "regime" in out and "max|d|" in out
    doc = json.loads((tmp_path / "compare.json").read_text())
    assert "Fz" in doc["results"]["max_abs"]
    assert doc["diagnostics"]["in_regime"] is True


# --- presets -----------------------------------------------------------------


def test_preset_emit_and_round_trip(tmp_path, capsys):
    assert main(["preset", "fig2a", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    path = tmp_path / "fig2a.json"
    doc = json.loads(path.read_text())
    assert doc["params"]["omega_B"] == {"value": 1.5, "unit": "(2pi)kHz"}
    # the emitted config is directly runnable (shortened for test speed)
    doc["integrator"] = {"t_final": 0.001, "n_samples": 5}
    cfg = _write(tmp_path, doc, "run.json")
    assert main(["master", "--config", cfg, "--out", str(tmp_path)]) == 0


def test_preset_fig3a_units(capsys):
    assert main(["preset", "fig3a"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["params"]["omega_B"] == {"value": 10.2, "unit": "(2pi)kHz"}
    assert doc["scan"]["parameter"] == "omega"
    assert doc["scan"]["n"] == 41


def test_preset_unknown_name_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["preset", "fig9z"])
    assert exc.value.code == 2


# --- error paths -------------------------------------------------------------


def test_missing_unit_exits_2_and_names_key(tmp_path, capsys):
    doc = _base_config()
    doc["params"]["gamma"] = 1e-4  # bare number: unit object required
    cfg = _write(tmp_path, doc)
    assert main(["master", "--config", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "params.gamma" in err and "unit" in err


def test_missing_config_key_exits_2(tmp_path, capsys):
    doc = _base_config()
    del doc["schedule"]
    cfg = _write(tmp_path, doc)
    assert main(["master", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "schedule" in capsys.readouterr().err


def test_invalid_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["master", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "JSON" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys):
    # a theta ramp far too fast for the reduced model's validity guard
    doc = _base_config(engine="bloch")
    doc["schedule"]["profile"] = {"kind": "arccos_sqrt_ramp", "T": 200.0}
    doc["integrator"] = {"t_final": 200.0, "n_samples": 9}
    cfg = _write(tmp_path, doc)
    assert main(["bloch", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_output_path_collision_exits_4(tmp_path, capsys):
    cfg = _write(tmp_path, _base_config())
    blocker = tmp_path / "outdir"
    blocker.write_text("a file where the output directory should go")
    assert main(["master", "--config", cfg, "--out", str(blocker)]) == 4
    assert "i/o error" in capsys.readouterr().err
