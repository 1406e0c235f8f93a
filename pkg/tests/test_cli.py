import json
import os
import shutil
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from periodic_rg import cli
from periodic_rg.errors import SchemaError
from periodic_rg.polytope import from_csv, set_equal

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_config(tmp_path, **fields):
    doc = {"schema": "scenario/1", "system": str(CONFIGS / "three_slot_plant.json")}
    doc.update(fields)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_validate_ok(capsys):
    code, out, _ = run(["validate", "--system", str(CONFIGS / "three_slot_system.json")], capsys)
    assert code == 0
    assert "A1-A4 satisfied" in out and "|.|=0.8" in out


def test_validate_unstable_exit_2(capsys):
    code, out, err = run(["validate", "--config", str(CONFIGS / "unstable.json")], capsys)
    assert code == 2
    assert "FAIL A2" in out and "error" in err


def test_missing_system_file(capsys, tmp_path):
    code, _, err = run(["validate", "--system", str(tmp_path / "nope.json")], capsys)
    assert code == 2 and "--system" in err


def test_compute_mas_three_slot(capsys, tmp_path):
    code, out, _ = run(["compute-mas", "--config", str(CONFIGS / "three_slot_sets.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "m = 12" in out and "j* = 10" in out
    assert "cyclic-relation failures = 0" in out
    for k in range(3):
        assert (tmp_path / f"slot_{k}.csv").exists()
        ET.fromstring((tmp_path / f"slot_{k}.svg").read_text())
        lines = (tmp_path / f"slot_{k}_vertices.csv").read_text().splitlines()
        assert lines[0] == "x,y" and len(lines) > 4


@pytest.mark.parametrize("form, m, complete, partial", [("f1", 22, 864, 384), ("f2", 24, 1560, 680)])
def test_compute_mas_augmented(capsys, tmp_path, form, m, complete, partial):
    cfg = write_config(tmp_path, formulation=form, check_samples=50)
    code, out, _ = run(["compute-mas", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    assert f"m = {m}" in out
    assert f"bytes32 complete = {complete}" in out and f"bytes32 partial = {partial}" in out
    assert not (tmp_path / "o" / "slot_0.svg").exists()


def test_slot_csv_matches_library(capsys, tmp_path, f1_storage):
    cfg = write_config(tmp_path, formulation="f1", mode="complete", check_samples=0)
    assert run(["compute-mas", "--config", cfg, "--out", str(tmp_path)], capsys)[0] == 0
    for k in range(3):
        P = from_csv((tmp_path / f"slot_{k}.csv").read_text())
        assert set_equal(P, f1_storage["complete"].slot_polytope(k))
        assert np.array_equal(P.H, f1_storage["complete"].slot_polytope(k).H)


def test_mode_override_gives_same_sets(capsys, tmp_path):
    cfg = write_config(tmp_path, formulation="f2", check_samples=0)
    run(["compute-mas", "--config", cfg, "--out", str(tmp_path / "a"), "--mode", "complete"], capsys)
    run(["compute-mas", "--config", cfg, "--out", str(tmp_path / "b"), "--mode", "partial", "--parallel"], capsys)
    for k in range(3):
        a = from_csv((tmp_path / "a" / f"slot_{k}.csv").read_text())
        b = from_csv((tmp_path / "b" / f"slot_{k}.csv").read_text())
        assert np.allclose(a.H, b.H, atol=1e-12)


def test_nontermination_exit_3(capsys, tmp_path):
    cfg = write_config(tmp_path, formulation="f1", max_steps=3)
    code, _, err = run(["compute-mas", "--config", cfg, "--out", str(tmp_path)], capsys)
    assert code == 3 and "no termination" in err


def test_infeasible_start_exit_4(capsys, tmp_path):
    cfg = write_config(tmp_path, formulation="f1", x0=[40.0, -40.0], horizon=5)
    code, _, err = run(["simulate", "--config", cfg, "--out", str(tmp_path)], capsys)
    assert code == 4 and "feasible" in err


@pytest.mark.parametrize("name, violations", [("pulse_none", True), ("pulse_f1", False), ("pulse_f2", False)])
def test_simulate_configs(capsys, tmp_path, name, violations):
    code, out, _ = run(["simulate", "--config", str(CONFIGS / f"{name}.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    first = out.splitlines()[1]
    assert first.startswith("steps with violations:")
    assert (first != "steps with violations: 0") == violations
    assert len((tmp_path / "trace.csv").read_text().splitlines()) == 61
    ET.fromstring((tmp_path / "trace.svg").read_text())
    assert (tmp_path / "trace_ungoverned.csv").exists() == (name != "pulse_none")


def test_simulate_needs_plant(capsys, tmp_path):
    code, _, err = run(["simulate", "--system", str(CONFIGS / "three_slot_system.json"), "--out", str(tmp_path)], capsys)
    assert code == 2 and "system" in err


def test_tradeoff(capsys, tmp_path):
    code, out, _ = run(["tradeoff", "--config", str(CONFIGS / "tradeoff_f1.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "n=1: 8 bytes saved per extra op" in out
    assert "n=4: 5 bytes saved per extra op" in out
    assert "measured 94" in out and "measured 864 B" in out
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "formulation,N,n,m,bytes_saved,extra_ops"
    assert len(lines) == 1 + 58 + 25


def test_tradeoff_f2(capsys, tmp_path):
    code, out, _ = run(["tradeoff", "--config", str(CONFIGS / "tradeoff_f2.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "measured 294" in out and "measured 1560 B" in out and "measured 680 B" in out


@pytest.mark.parametrize("fields, path", [
    ({"colour": "red"}, "colour"),
    ({"epsilon": 2}, "epsilon"),
    ({"formulation": "f3"}, "formulation"),
    ({"horizon": -1}, "horizon"),
    ({"reference": {"kind": "pulse", "levels": [0, 1]}}, "reference"),
    ({"reference": {"levels": [0, "a"]}}, "reference.levels"),
    ({"reference": {"levels": [0], "speed": 1}}, "reference.speed"),
    ({"sweeps": [{"N": 3, "n": 1, "m_min": 5, "m_max": 2}]}, "sweeps[0].m_max"),
    ({"sweeps": [{"N": 3, "n": 1.5, "m_min": 1, "m_max": 2}]}, "sweeps[0].n"),
    ({"x0": [0, None]}, "x0"),
    ({"system": "missing.json"}, "system"),
    ({"schema": "scenario/2"}, "schema"),
])
def test_config_errors_name_the_field(tmp_path, fields, path):
    doc = {"schema": "scenario/1", "system": str(CONFIGS / "three_slot_plant.json")}
    doc.update(fields)
    with pytest.raises(SchemaError) as exc:
        cli.parse_config(doc, str(tmp_path))
    assert exc.value.path == path


def test_config_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["validate", "--config", str(bad)], capsys)[0] == 2
    cfg = write_config(tmp_path, x0=[0.0])
    code, _, err = run(["simulate", "--config", cfg, "--out", str(tmp_path)], capsys)
    assert code == 2 and "x0" in err


def test_relative_system_path(tmp_path):
    shutil.copy(CONFIGS / "three_slot_plant.json", tmp_path / "plant.json")
    (tmp_path / "sub").mkdir()
    cfg_path = tmp_path / "sub" / "c.json"
    cfg_path.write_text(json.dumps({"schema": "scenario/1", "system": "../plant.json"}))
    cfg = cli.load_config(cfg_path)
    assert os.path.samefile(cfg.system, tmp_path / "plant.json")


def test_all_shipped_configs_parse():
    for path in CONFIGS.glob("*.json"):
        if json.loads(path.read_text()).get("schema") == "scenario/1":
            cli.load_config(path)


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "periodic_rg.cli", "validate", "--system",
                          str(CONFIGS / "three_slot_system.json")], capture_output=True, text=True)
    assert res.returncode == 0
    assert "A1-A4 satisfied" in res.stdout
