import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from minitwistor.cli import dumps, main, run_command

STATUS_FOR_CODE = {0: "ok", 1: "fail", 2: "error"}


def run(*argv):
    code, text = run_command(list(argv))
    payload = json.loads(text)
    assert payload["status"] == STATUS_FOR_CODE[code]
    return code, payload


def test_documented_examples():
    assert run("g2", "algebra-dim") == (0, {"dim": 14, "status": "ok"})
    assert run("laplacian", "multiplicity", "--n", "2", "--k", "2", "--oracle") == (
        0, {"closed_form": 5, "oracle": 5, "status": "ok"})
    code, out = run("line", "intersect", "--p", "1,0", "--q", "0,1")
    assert code == 0 and len(out["lines"]) == 2
    for L in out["lines"]:
        assert np.allclose(L["v"], [0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize(
    "argv",
    [
        ["line", "from-points", "--p", "0,0,0", "--q", "1,0,0"],
        ["line", "incidence", "--p", "1,1,0", "--u", "1,0,0", "--v", "0,1,0"],
        ["section", "eval", "--p", "1,2,3", "--u", "0,0,2"],
        ["section", "zeros", "--p", "0,0,3"],
        ["section", "common", "--p", "0,0,0", "--q", "1,0,0", "--r", "0,1,0"],
        ["laplacian", "check", "--p", "1,-2,3", "--u", "0,0.6,0.8"],
        ["laplacian", "gradient", "--p", "1,2,3", "--u", "0,0.6,0.8"],
        ["g2", "cross", "--x", "1,0,0,0,0,0,0", "--y", "0,1,0,0,0,0,0"],
        ["g2", "isotropy", "--u", "3/5,4/5,0,0,0,0,0"],
        ["g2", "pseudoholo", "--p", "1,2,3,4,5,6,7", "--u", "0,0,0,0,0,0,1"],
        ["g2", "pseudoholo", "--p", "1,2,3,4,5,6,7", "--u", "0,0,0,0,0,0,1", "--fd"],
        ["dual", "motion", "--axis", "0,0,1", "--angle", "0.5", "--c", "1,2,3"],
        ["xray", "john", "--field", '{"bumps":[{"A":1,"c":[0,0,0],"w":1}]}', "--chart", "0.1,-0.2,0.3,0.4"],
    ],
)
def test_commands_succeed_with_matching_status(argv):
    code, _ = run(*argv)
    assert code == 0


def test_values_in_payloads():
    _, out = run("section", "eval", "--p", "1,2,3", "--u", "0,0,2")
    assert out["line"] == {"u": [0, 0, 1], "v": [1, 2, 0]}
    _, out = run("section", "common", "--p", "0,0,0", "--q", "1,0,0", "--r", "0,1,0")
    assert out["line"] is None
    _, out = run("g2", "cross", "--x", "1,0,0,0,0,0,0", "--y", "0,1,0,0,0,0,0")
    assert out["cross"] == [0, 0, 1, 0, 0, 0, 0]
    _, out = run("g2", "isotropy", "--u", "3/5,4/5,0,0,0,0,0")
    assert out["dim"] == 8


def test_printed_formula_is_reported_as_diagnostic():
    code, out = run("line", "intersect", "--p", "1,0", "--q", "0,1", "--printed-formula")
    assert code == 0 and out["printed_formula"] is True and out["matches_oracle"] is False


def test_verification_failure_exits_1():
    code, out = run("laplacian", "check", "--p", "1,2,3", "--u", "0,0.6,0.8", "--step", "0.3")
    assert code == 1 and out["residual"] > out["tolerance"]


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["line"],
        ["line", "from-points", "--p", "1,x", "--q", "0,1"],
        ["line", "from-points", "--p", "1,1", "--q", "1,1"],
        ["line", "incidence", "--p", "1,1,0"],
        ["dual", "angle", "--a", "{not json", "--b", "{}"],
        ["dual", "angle", "--a", "/no/such/file.json", "--b", "{}"],
        ["whittaker", "eval", "--spec", '{"terms": 3}', "--x", "1,2,3"],
        ["g2", "isotropy", "--u", "1/0,0,0,0,0,0,0"],
        ["laplacian", "multiplicity", "--n", "0", "--k", "1"],
        ["xray", "john", "--field", '{"bumps":[]}', "--chart", "1,2"],
        ["laplacian", "check", "--p", "1,2,3", "--u", "0,0,0"],
    ],
)
def test_input_errors_exit_2_with_error_object(argv):
    code, out = run(*argv)
    assert code == 2
    assert set(out["error"]) == {"type", "message"}


def test_negative_vector_values_parse():
    code, out = run("line", "from-points", "--p", "-1,0", "--q", "-1,-2")
    assert code == 0 and out["line"]["u"] == [0, -1]


def test_json_round_trips(tmp_path):
    _, ev = run("section", "eval", "--p", "1,2,3", "--u", "0,0,1")
    line = json.dumps(ev["line"])
    code, inc = run("line", "incidence", "--p", "1,2,3", "--line", line)
    assert code == 0 and inc["incident"] is True
    # whole payloads are accepted too, from a file
    path = tmp_path / "line.json"
    path.write_text(json.dumps(ev))
    code, inc = run("line", "incidence", "--p", "1,2,7", "--line", str(path))
    assert inc["incident"] is True

    _, ang = run("dual", "angle", "--a", '{"u":[1,0,0],"v":[0,0,0]}', "--b", '{"u":[0,1,0],"v":[0,0,2]}')
    assert ang["theta"] == pytest.approx(math.pi / 2) and abs(ang["rho"]) == pytest.approx(2)
    _, again = run("dual", "angle", "--a", json.dumps(ang["a"]), "--b", json.dumps(ang["b"]))
    assert again["theta"] == ang["theta"] and again["rho"] == ang["rho"]

    _, mot = run("dual", "motion", "--axis", "0,0,1", "--angle", "0.3", "--c", "1,0,0",
                 "--line", line)
    code, moved = run("dual", "angle", "--a", json.dumps(mot["image"]), "--b", json.dumps(mot["line"]))
    assert code == 0 and moved["theta"] == 0 and moved["rho"] == pytest.approx(0, abs=1e-12)

    _, xr = run("xray", "eval", "--field", '{"bumps":[{"A":1,"c":[0,0,0],"w":1}]}', "--line", line)
    _, xr2 = run("xray", "eval", "--field", '{"bumps":[{"A":1,"c":[0,0,0],"w":1}]}', "--line", json.dumps(xr))
    assert xr == xr2


def test_whittaker_eval_and_verify():
    spec = '{"terms":[{"re":1,"im":0,"a":0,"b":1}]}'
    code, out = run("whittaker", "eval", "--spec", spec, "--x", "0,0,1",
                    "--contour", '{"center":[0,0],"radius":0.5}')
    assert code == 0 and out["V"]["im"] == pytest.approx(math.pi, abs=1e-8)
    code, out = run("whittaker", "verify", "--spec", spec, "--x", "0.5,0.4,1")
    assert code == 0 and out["residual"] <= out["tolerance"]
    code, out = run("whittaker", "eval", "--spec", spec, "--x", "0,0,1", "--contour", '{"center":[0.5,0],"radius":0.5}')
    assert code == 2 and "pole" in out["error"]["message"]


def read_grid(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_grid_inverse_distance_law(tmp_path):
    out = tmp_path / "grid.csv"
    code, res = run("whittaker", "grid", "--spec", '{"terms":[{"re":1,"im":0,"a":0,"b":1}]}',
                    "--lo", "0.5,0.5,0.5", "--hi", "1.5,1.5,1.5", "--res", "5", "--out", str(out))
    assert code == 0 and res["rows"] == 125 and res["invalid"] == 0
    header, data = read_grid(out)
    assert header == ["x1", "x2", "x3", "re_V", "im_V"]
    assert len(data) == 125
    r = np.linalg.norm(data[:, :3], axis=1)
    product = np.hypot(data[:, 3], data[:, 4]) * r
    assert np.ptp(product) <= 1e-6
    # lexicographic in grid indices: last coordinate varies fastest
    assert data[1, 2] > data[0, 2] and data[1, 0] == data[0, 0]
    assert data[5, 1] > data[0, 1] and data[25, 0] > data[0, 0]


def test_grid_edge_cases(tmp_path, capfd):
    zero = tmp_path / "zero.csv"
    run("whittaker", "grid", "--spec", '{"terms":[]}', "--lo", "0,0,0", "--hi", "1,1,1",
        "--res", "2", "--out", str(zero))
    assert np.all(read_grid(zero)[1][:, 3:] == 0)
    one = tmp_path / "one.csv"
    run("whittaker", "grid", "--spec", '{"terms":[{"re":1,"im":0,"a":0,"b":1}]}',
        "--lo", "1,1,1", "--hi", "2,2,2", "--res", "1", "--out", str(one))
    assert len(read_grid(one)[1]) == 1
    bad = tmp_path / "bad.csv"
    code, res = run("whittaker", "grid", "--spec", '{"terms":[{"re":1,"im":0,"a":0,"b":1}]}',
                    "--lo", "-1,-1,-1", "--hi", "1,1,1", "--res", "3", "--out", str(bad))
    assert code == 0 and res["invalid"] > 0
    assert np.isnan(read_grid(bad)[1][:, 3]).sum() == res["invalid"]
    code, _ = run("whittaker", "grid", "--spec", '{"terms":[]}', "--lo", "0,0,0", "--hi", "1,1,1",
                  "--out", str(tmp_path / "missing" / "dir.csv"))
    assert code == 2


def test_env_step_is_honoured(monkeypatch):
    monkeypatch.setenv("MINITWISTOR_FD_STEP", "0.002")
    _, out = run("laplacian", "check", "--p", "1,2,3", "--u", "0,0.6,0.8")
    assert out["step"] == 0.002


def test_selftest_module_filter_and_determinism():
    code, out = run("selftest", "--module", "g2")
    assert code == 0 and {c["module"] for c in out["checks"]} == {"g2"}
    assert all("seconds" not in c for c in out["checks"])
    a = run_command(["selftest", "--module", "dual", "--seed", "7"])
    b = run_command(["selftest", "--module", "dual", "--seed", "7"])
    assert a == b
    _, timed = run("selftest", "--module", "core", "--timings")
    assert all("seconds" in c for c in timed["checks"])


def test_expected_failures_do_not_affect_exit_code():
    code, out = run("selftest", "--module", "lines")
    flagged = [c for c in out["checks"] if c.get("expected_fail")]
    assert code == 0 and flagged and not any(c["passed"] for c in flagged)


def test_corrupted_phi_exits_1():
    code, out = run("selftest", "--module", "g2", "--corrupt-phi")
    assert code == 1
    table = next(c for c in out["checks"] if c["name"] == "coassociative_table")
    assert not table["passed"]


def test_serializer():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps([math.nan, math.inf, 1.0, 2]) == "[null, null, 1, 2]"
    assert json.loads(dumps({"z": 1 + 2j, "b": np.bool_(True), "a": np.arange(2)})) == {
        "z": {"re": 1, "im": 2}, "b": True, "a": [0, 1]}


def test_main_splits_stdout_and_stderr(capsys):
    assert main(["bogus"]) == 2
    captured = capsys.readouterr()
    assert json.loads(captured.out)["status"] == "error"
    assert "invalid choice" in captured.err
    assert main(["--help"]) == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "minitwistor", "g2", "algebra-dim"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["dim"] == 14 and proc.stderr == ""
