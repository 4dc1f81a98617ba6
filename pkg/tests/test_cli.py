import csv
import io
import json
import math

import pytest

from turing_valley.cli import EXIT_CONFIG, EXIT_OK, EXIT_PRECONDITION, EXIT_VERIFY, main

EX1 = {"two_type": {"hA": [0.375, 0.475], "hB": [0.625, 0.725], "phiA": 0.8, "m": [0.29, 0.7], "c": 0.5}}
FIG = {"economy": {"h": [0.5, 0.6], "c": 0.5}}


def run(tmp_path, command, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    out = tmp_path / f"out-{command}-{len(list(tmp_path.iterdir()))}"
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    text = out.read_text() if out.exists() else ""
    return code, text


def test_solve_two_type(tmp_path):
    code, text = run(tmp_path, "solve", EX1)
    rep = json.loads(text)
    assert code == EXIT_OK
    assert rep["case"] == "2c"
    assert rep["wB"] == pytest.approx(0.667, abs=1e-3)
    assert abs(rep["oracle_delta"]) < 1e-12
    assert rep["margins"]["mBA_B"] == pytest.approx(0.667, abs=5e-4)


def test_solve_one_type(tmp_path):
    code, text = run(tmp_path, "solve", {"economy": {"h": [0.5, 0.6], "m": [0.5, 0.6], "c": 0.5}})
    rep = json.loads(text)
    assert code == EXIT_OK and rep["region"] == "Rs" and rep["w_star"] == pytest.approx(0.3)
    # abundance fails at mu=2.3: general solver
    code, text = run(tmp_path, "solve", {"h": [0.5, 0.6], "m": [0.2, 0.9], "c": 0.5, "mu": 2.3})
    rep = json.loads(text)
    assert rep["region"] == "RbMixed" and not rep["abundant"]
    assert abs(rep["oracle_delta"]) < 1e-10


@pytest.mark.parametrize("cfg", [
    "{not json",
    json.dumps({"economy": {"h": [0.5, 1.5], "m": [0.1, 0.1], "c": 0.5}}),
    json.dumps({"economy": {"h": [0.5, 0.6], "m": [0.1, 0.1], "c": 1.5}}),
    json.dumps({"economy": {"h": [0.5, 0.6], "c": 0.5}}),
    json.dumps({"grid": {"resolution": 1}, **FIG}),
    json.dumps({"economy": {"h": [0.5, 0.6], "m": [0.1, 0.1], "c": 0.5, "dist": {"family": "normal"}}}),
])
def test_config_errors(tmp_path, cfg):
    assert run(tmp_path, "solve", cfg)[0] == EXIT_CONFIG


def test_missing_file(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


def test_precondition_errors(tmp_path):
    cfg = {"two_type": {**EX1["two_type"], "mu": 2.0}}
    assert run(tmp_path, "solve", cfg)[0] == EXIT_PRECONDITION
    traj = {"economy": {"h": [0.5, 0.6], "c": 0.5, "mu": 2.0}, "path": {"start": [0, 0], "end": [1, 1], "steps": 4}}
    assert run(tmp_path, "trajectory", traj)[0] == EXIT_PRECONDITION


def test_sweep_smoke(tmp_path):
    code, text = run(tmp_path, "sweep", {**FIG, "grid": {"resolution": 2}})
    rows = list(csv.reader(io.StringIO(text)))
    assert code == EXIT_OK
    assert rows[0] == ["m1", "m2", "region", "w_star", "r_star", "output", "capital_income"]
    assert [r[:3] for r in rows[1:]] == [["0", "0", "Rb"], ["0", "1", "Rb"], ["1", "0", "Rb"], ["1", "1", "Rt"]]


def test_sweep_region_map(tmp_path):
    _, text = run(tmp_path, "sweep", {**FIG, "grid": {"resolution": [11, 6]}})
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 66
    cell = {(float(r["m1"]), float(r["m2"])): r["region"] for r in rows}
    assert cell[(0.5, 0.6)] == "Rs" and cell[(1.0, 1.0)] == "Rt"


def test_sweep_two_type_and_json(tmp_path):
    code, text = run(tmp_path, "sweep", {**EX1, "grid": {"resolution": 3}}, "--format", "json")
    rows = json.loads(text)["rows"]
    assert code == EXIT_OK and len(rows) == 9
    assert set(rows[0]) == {"m1", "m2", "case", "wA", "wB", "total_w", "r_star", "in_Rh"}


def test_sweep_deterministic_across_threads(tmp_path, monkeypatch):
    cfg = {"economy": {"h": [0.5, 0.6], "c": 0.5, "mu": 2.3}, "grid": {"resolution": 23}}
    _, one = run(tmp_path, "sweep", cfg, "--threads", "1")
    _, four = run(tmp_path, "sweep", cfg, "--threads", "4")
    monkeypatch.setenv("TV_THREADS", "3")
    _, env = run(tmp_path, "sweep", cfg)
    assert one == four == env
    assert one.encode() == four.encode()


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("TV_THREADS", "lots")
    assert run(tmp_path, "sweep", {**FIG, "grid": {"resolution": 2}})[0] == EXIT_CONFIG


@pytest.mark.parametrize("h, expected", [([1 / 6, 0.2], [1, 1]), ([1 / 6, 0.8], [1, 0])])
def test_maxlabor_one_type(tmp_path, h, expected):
    code, text = run(tmp_path, "maxlabor", {"economy": {"h": h, "c": 0.5}})
    rep = json.loads(text)
    assert code == EXIT_OK and rep["argmax"] == expected
    assert rep["thresholds"]["h1_bar"] == pytest.approx(2 - math.sqrt(3))


def test_maxlabor_reference_discrepancies(tmp_path):
    cfg = {"two_type": {"hA": [0.05, 0.05], "hB": [0.05, 0.8], "phiA": 2 / 3, "c": 0.5},
           "search": {"resolution": 21},
           "reference": {"tolerance": 1e-3, "values": {"wA(1,0)": 0.01, "total(0,0)": 0.027, "wB(1,0)": 1.6}}}
    code, text = run(tmp_path, "maxlabor", cfg)
    rep = json.loads(text)
    assert code == EXIT_OK
    assert {d["key"]: d["computed"] for d in rep["discrepancies"]} == pytest.approx({"wA(1,0)": 0.1, "total(0,0)": 0.03})
    assert rep["global"]["argmax"] == [1, 0] and rep["global"]["is_vertex"]


def test_maxlabor_same_types(tmp_path):
    h = [0.4, 0.55]
    _, one = run(tmp_path, "maxlabor", {"economy": {"h": h, "c": 0.5}})
    _, two = run(tmp_path, "maxlabor", {"two_type": {"hA": h, "hB": h, "phiA": 0.5, "c": 0.5}, "search": {"resolution": 11}})
    assert json.loads(two)["global"]["argmax"] == json.loads(one)["argmax"]


def test_trajectory(tmp_path):
    cfg = {**FIG, "path": {"start": [0, 0], "end": [1, 1], "steps": 10}}
    code, text = run(tmp_path, "trajectory", cfg)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == EXIT_OK and len(rows) == 11 and rows[-1]["region"] == "Rt"


def test_scan(tmp_path):
    cfg = {"economy": {"h": [0.5, 0.6], "c": 0.5, "mu": 2.3},
           "path": {"start": [0.0, 0.9], "end": [0.4, 0.9], "steps": 400}}
    code, text = run(tmp_path, "scan", cfg, "--format", "json")
    rep = json.loads(text)
    assert code == EXIT_OK and len(rep["rows"]) == 401
    assert sorted((j["series"], j["direction"]) for j in rep["jumps"]) == [("r_star", 1), ("w_star", -1)]
    _, text = run(tmp_path, "scan", cfg)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert sum(r["w_jump"] == "-1" for r in rows) == 1


def test_verify_exit_codes(tmp_path):
    code, text = run(tmp_path, "verify", {"verify": {"instances": 20}}, "--seed", "1")
    rep = json.loads(text)
    assert code == EXIT_OK and rep["passed"] and rep["seed"] == 1
    code, text = run(tmp_path, "verify", {"verify": {"instances": 20, "fault": 1e-3}})
    assert code == EXIT_VERIFY
    assert not json.loads(text)["passed"]
    code, text = run(tmp_path, "verify", {"verify": {"instances": 0}})
    rep = json.loads(text)
    assert code == EXIT_OK and rep["warnings"]
