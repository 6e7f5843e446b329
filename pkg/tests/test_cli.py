import json
import math
from pathlib import Path

import pytest

from rigiditylab.cli import CSV_HEADERS, main

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, obj, name="s.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_cohomology_sign(capsys):
    code, out, _ = run(capsys, "run", SCEN / "z2_sign_cohomology.json")
    assert code == 0
    rep = json.loads(out)
    assert rep["results"]["cohomology"]["h0"] == 0
    assert rep["results"]["cohomology"]["h1"] == 0
    assert rep["task"] == "cohomology" and len(rep["input_digest"]) == 64


def test_torus_l1(capsys):
    code, out, _ = run(capsys, "torus", SCEN / "torus_l1.json")
    assert code == 0
    assert abs(json.loads(out)["results"]["eps"] - 2 / math.sqrt(5)) <= 1e-12


def test_flags_override_params(capsys):
    code, out, _ = run(capsys, "torus", SCEN / "torus_l1.json", "--weight-bound", "7")
    assert code == 0
    assert json.loads(out)["results"]["eps"] < 2 / math.sqrt(5)


def test_malformed_json(capsys, tmp_path):
    code, out, err = run(capsys, "run", write(tmp_path, "{not json"))
    assert code == 2 and out == "" and "malformed JSON" in err


def test_bad_generator(capsys, tmp_path):
    sc = {"task": "check", "presentation": {"generators": 1, "relators": [[1, 2]]},
          "representation": {"kind": "matrices", "matrices": [[[[1, 0]]]]}}
    code, out, err = run(capsys, "run", write(tmp_path, sc))
    assert code == 2 and out == "" and "$.presentation" in err


def test_task_mismatch(capsys):
    code, out, _ = run(capsys, "torus", SCEN / "z2_sign_cohomology.json")
    assert code == 2 and out == ""


def test_missing_file(capsys, tmp_path):
    code, out, _ = run(capsys, "run", tmp_path / "nope.json")
    assert code == 2 and out == ""


def test_numerical_failure(capsys, tmp_path):
    sc = {"task": "rigidity-solve", "presentation": {"generators": 1, "relators": []},
          "representation": {"kind": "matrices", "matrices": [[[[1, 0]]]]},
          "params": {"target": {"kind": "matrices", "matrices": [[[[math.cos(3.1), math.sin(3.1)]]]]}}}
    out_path = tmp_path / "out.json"
    code, out, err = run(capsys, "run", write(tmp_path, sc), "-o", out_path)
    assert code == 3 and out == "" and not out_path.exists()
    assert "numerical failure" in err


def test_csv_sweep(capsys, tmp_path):
    csv_path = tmp_path / "t.csv"
    code, _, _ = run(capsys, "gap", "sweep", "--max-spin", "2", "--csv", csv_path)
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADERS["gap-sweep"])
    assert len(lines) == 1 + 4


def test_csv_non_tabular(capsys, tmp_path):
    csv_path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "run", SCEN / "z2_sign_cohomology.json", "--csv", csv_path)
    assert code == 0 and not csv_path.exists()
    assert any("no tabular payload" in w for w in json.loads(out)["warnings"])


def test_output_file(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    code, out, _ = run(capsys, "run", SCEN / "torus_l1.json", "-o", out_path)
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["task"] == "torus"


def test_threads_do_not_change_output(capsys, monkeypatch):
    _, a, _ = run(capsys, "run", SCEN / "gap_sweep.json")
    _, b, _ = run(capsys, "run", SCEN / "gap_sweep.json", "--threads", "4")
    monkeypatch.setenv("RIGIDITYLAB_THREADS", "3")
    _, c, _ = run(capsys, "run", SCEN / "gap_sweep.json")
    assert a == b == c


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("RIGIDITYLAB_THREADS", "many")
    code, out, _ = run(capsys, "run", SCEN / "torus_l1.json")
    assert code == 2 and out == ""


def test_timing_flag(capsys):
    code, out, _ = run(capsys, "run", SCEN / "torus_l1.json", "--timing")
    assert code == 0 and "timing" in json.loads(out)


@pytest.mark.parametrize("name", ["z5_solve", "zz_deform", "averaging_random"])
def test_deterministic(capsys, name):
    _, a, _ = run(capsys, "run", SCEN / f"{name}.json")
    _, b, _ = run(capsys, "run", SCEN / f"{name}.json")
    assert a == b and a
