"""Batch front end: exit codes, determinism and witness round trips."""

import json
from pathlib import Path

import pytest

from gwcalc.cli import dumps, main, run_job

JOBS = Path(__file__).parent / "jobs"


def load(name):
    return json.loads((JOBS / name).read_text())


def test_tower_identity_stabilizes_at_one():
    code, rep = run_job(load("tower_identity.json"))
    assert code == 0 and rep["schema"] == "gwcalc/1"
    assert rep["result"]["stabilized"] is True and rep["result"]["stage"] == 1


def test_noncommuting_square_names_face(capsys):
    assert main(["run", str(JOBS / "noncommuting_square.json")]) == 2
    err = capsys.readouterr().err
    assert "inputs.cube" in err and "face at {}" in err


def test_excisive_tensor_square_fails_with_witness(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", str(JOBS / "excisive_tensor_square.json"), "--out", str(out)]) == 1
    rep = json.loads(out.read_text())
    w = rep["result"]["witness"]
    # the witness re-validates and re-fails
    code, r2 = run_job({"command": "CheckCube", "inputs": {"cube": w["image"], "predicate": "cartesian"}})
    assert code == 1 and r2["result"]["valid"]
    code, r3 = run_job({"command": "CheckCube", "inputs": {"cube": w["cube"], "predicate": "strongly_cocartesian"}})
    assert code == 0


@pytest.mark.parametrize("name", ["tower_identity.json", "excisive_tensor_square.json", "square_zero.json",
                                  "cotangent.json", "lift.json"])
def test_reports_are_byte_identical(name):
    job = load(name)
    assert dumps(run_job(job)[1]) == dumps(run_job(job)[1])


@pytest.mark.parametrize("name,code", [("square_zero.json", 0), ("cotangent.json", 0), ("naive_unit.json", 0),
                                       ("naive_dual_numbers.json", 0), ("lift.json", 0),
                                       ("relative_tower.json", 0), ("complete_cube.json", 0)])
def test_other_commands(name, code):
    assert run_job(load(name))[0] == code


def test_seed_flag_overrides_job(tmp_path):
    out = tmp_path / "r.json"
    main(["run", str(JOBS / "excisive_tensor_square.json"), "--out", str(out), "--seed", "11", "--threads", "4"])
    assert json.loads(out.read_text())["job"]["seed"] == 11


@pytest.mark.parametrize("job,path", [
    ({"command": "Nope"}, "command"),
    ({"command": "Tower", "inputs": {"n": 1}}, "inputs.functor"),
    ({"command": "Tower", "window": [3, 1], "inputs": {}}, "window"),
    ({"command": "Tower", "extra": 1}, "extra"),
    ({"command": "Tower", "inputs": {"functor": {"op": "tensor_power", "k": 0}, "n": 1}}, "inputs.functor.k"),
    ({"command": "Cotangent", "inputs": {"presentation": {"field": "Q", "vars": ["x"],
                                                          "relations": [{"terms": [{"exps": ["a"]}]}]}}},
     "inputs.presentation.relations[0].terms[0]"),
])
def test_schema_errors_point_at_field(job, path):
    code, rep = run_job(job)
    assert code == 2 and rep["error"]["path"] == path


def test_invalid_json_file(tmp_path, capsys):
    p = tmp_path / "j.json"
    p.write_text("{nope")
    assert main(["run", str(p)]) == 2
