import json
import subprocess
import sys

import numpy as np
import pytest

from netreach.cli import run
from netreach.fixtures import fixture_text


@pytest.fixture
def fig3_file(tmp_path):
    path = tmp_path / "fig3.json"
    path.write_text(fixture_text("fig3"))
    return path


def invoke(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(out):
    doc = json.loads(out)
    assert set(doc) == {"command", "inputs_digest", "results", "versions"}
    assert doc["versions"]["schema"] == 1
    return doc


@pytest.mark.parametrize("name", ["fig3", "fig4"])
def test_demo(capsys, name):
    code, out, err = invoke(capsys, "demo", name)
    assert code == 0
    doc = report(out)
    assert doc["results"]["reach"]["leader"]["kalman"]["verdict"] == "Reachable"
    assert doc["results"]["follower_steerable"]["verdict"] == "Reachable"
    assert doc["results"]["plan"]["resimulated_error"] <= 1e-8
    if name == "fig4":
        circ = doc["results"]["structured"]["circulant"]
        assert circ["applies"] and circ["hypotheses_hold"] and circ["verdict"] == "Reachable"


def test_validate(capsys, fig3_file):
    code, out, err = invoke(capsys, "validate", fig3_file)
    assert code == 0 and "valid" in err
    assert str(fig3_file) in report(out)["inputs_digest"]


def test_validate_bad_block(capsys, tmp_path):
    doc = json.loads(fixture_text("fig3"))
    doc["gains"][0]["L"] = [[1.0, 2.0]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out, err = invoke(capsys, "validate", path)
    assert code == 2
    assert report(out)["results"]["validation"]["errors"]


def test_missing_file(capsys, tmp_path):
    missing = tmp_path / "missing.json"
    code, _, err = invoke(capsys, "reach", missing)
    assert code == 2 and "missing.json" in err


def test_malformed_json(capsys, tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{nope")
    assert invoke(capsys, "aggregate", path)[0] == 2


def test_usage_errors(capsys):
    for argv in ([], ["frobnicate"], ["demo", "fig9"], ["reach"]):
        with pytest.raises(SystemExit) as info:
            run(argv)
        assert info.value.code == 64
    capsys.readouterr()


def test_aggregate(capsys, fig3_file):
    code, out, _ = invoke(capsys, "aggregate", fig3_file)
    assert code == 0
    res = report(out)["results"]["aggregate"]
    assert res["A_f"] == [[0.2, 1, 1], [2, 0.2, 2], [3, 3, 0.2]]
    assert res["dims"]["n_f"] == 3


def test_reach_all_methods(capsys, fig3_file):
    code, out, err = invoke(capsys, "reach", fig3_file, "--method", "all", "--tol", "1e-9")
    assert code == 0
    res = report(out)["results"]["reach"]
    for m in ("kalman", "pbh", "gramian"):
        assert res["leader"][m]["verdict"] == "Reachable"
        assert res["leader"][m]["tolerance"] == 1e-9
    assert "base-reachable" in res["leader"]["note"]


def test_structured(capsys, fig3_file):
    code, out, err = invoke(capsys, "structured", fig3_file)
    assert code == 0
    res = report(out)["results"]["structured"]
    assert not res["symmetric"]["applies"] and not res["circulant"]["applies"]


def test_simulate_csv(capsys, fig3_file, tmp_path):
    x0 = tmp_path / "x0.json"
    x0.write_text("[1, 0, 0, 0]")
    code, out, _ = invoke(capsys, "simulate", fig3_file, "--x0", x0, "--steps", 2)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,x_1,x_2,x_3,x_4,w_1,w_2,w_3,w_4"
    row = [float(v) for v in lines[-1].split(",")]
    assert row[0] == 2 and np.allclose(row[1:4], [5.04, 6.8, 7.2], rtol=1e-14)
    assert len(lines) == 4


def test_simulate_levels_agree(capsys, fig3_file, tmp_path):
    u = tmp_path / "u.csv"
    u.write_text("1\n-1\n0.5\n")
    outs = []
    for level in ("subsystem", "aggregate"):
        code, out, _ = invoke(capsys, "simulate", fig3_file, "--u", u, "--level", level)
        assert code == 0
        outs.append(np.loadtxt(out.splitlines()[1:], delimiter=","))
    assert np.allclose(outs[0], outs[1], rtol=1e-12, atol=0)


def test_simulate_needs_horizon(capsys, fig3_file):
    assert invoke(capsys, "simulate", fig3_file)[0] == 2


def test_steer(capsys, fig3_file, tmp_path):
    target = tmp_path / "target.txt"
    target.write_text("1 1 1\n")
    inputs, traj = tmp_path / "u.csv", tmp_path / "traj.csv"
    code, out, _ = invoke(
        capsys, "steer", fig3_file, "--target", target, "--steps", 6, "--inputs-csv", inputs, "--trajectory", traj
    )
    assert code == 0
    plan = report(out)["results"]["plan"]
    assert plan["achieved_error"] <= 1e-8 and plan["minimum_feasible_horizon"] == 4
    assert inputs.read_text().splitlines()[0] == "t,u_1"
    assert len(traj.read_text().splitlines()) == 8


def test_steer_too_short(capsys, fig3_file, tmp_path):
    target = tmp_path / "target.json"
    target.write_text("[1, 1, 1]")
    code, _, err = invoke(capsys, "steer", fig3_file, "--target", target, "--steps", 2)
    assert code == 3 and "rank" in err


def test_generic(capsys, tmp_path):
    profile = tmp_path / "p.json"
    profile.write_text(json.dumps({"followers": [[1, 1, 1]] * 3, "leaders": [[1, 1, 1]]}))
    margins = tmp_path / "m.csv"
    code, out, _ = invoke(capsys, "generic", "--profile", profile, "--trials", 20, "--seed", 3, "--margins-csv", margins)
    assert code == 0
    res = report(out)["results"]["generic"]
    assert res["reachable_count"] == {"leader": 20, "base": 20, "cascade": 20}
    assert res["seed"] == 3 and res["label"] == "consistent with generic reachability"
    assert len(margins.read_text().splitlines()) == 21


def test_generic_bad_profile(capsys, tmp_path):
    profile = tmp_path / "p.json"
    profile.write_text(json.dumps({"followers": [[0, 1, 1]], "leaders": [[1, 1, 1]]}))
    assert invoke(capsys, "generic", "--profile", profile, "--trials", 2)[0] == 2


def test_report_is_reproducible(capsys, fig3_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert invoke(capsys, "reach", fig3_file, "--out", path)[0] == 0
    assert a.read_text() == b.read_text()


def test_json_floats_round_trip(capsys, fig3_file, tmp_path):
    target = tmp_path / "t.json"
    target.write_text("[0.1, 0.2, 0.3]")
    code, out, _ = invoke(capsys, "steer", fig3_file, "--target", target)
    assert code == 0
    assert json.loads(out)["results"]["plan"]["target"] == [0.1, 0.2, 0.3]


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "netreach.cli", "demo", "fig3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "demo"
