import json
import subprocess
import sys

import pytest

EXE = [sys.executable, "-m", "dimgroup"]

ECS_INPUT = {"k": 1, "stages": [{"p": 5, "v": [0], "B": [[1]]},
                                {"p": 7, "v": [0], "B": [[1]]},
                                {"p": 11, "v": [0], "B": [[1]]}]}
ERS_INPUT = {"k": 1, "stages": [{"p": 25, "u": [8], "B": [[1]]},
                                {"p": 125, "u": [5], "B": [[1]]}],
             "trace_row": [[1, 3]]}
ECRS_INPUT = {"k": 2, "lambda": 3, "rho": [1, 1], "p_seq": [7, 13, 19]}


def run_cli(*args):
    proc = subprocess.run(EXE + list(args), capture_output=True, text=True)
    return proc.returncode, proc.stdout


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.mark.parametrize("kind,payload", [
    ("ecs", ECS_INPUT), ("ers", ERS_INPUT), ("ecrs", ECRS_INPUT)])
def test_build_verify_round_trip(tmp_path, kind, payload):
    inp = write(tmp_path, "in.json", payload)
    out = str(tmp_path / "out.json")
    code, stdout = run_cli("build", kind, "-i", inp, "-o", out)
    assert code == 0, stdout
    code, stdout = run_cli("verify", "-i", out)
    assert code == 0, stdout
    report = json.loads(stdout)
    assert report["ok"]
    assert report["claim_checks"][kind]


def test_verify_detects_perturbation(tmp_path):
    inp = write(tmp_path, "in.json", ECS_INPUT)
    out = str(tmp_path / "out.json")
    assert run_cli("build", "ecs", "-i", inp, "-o", out)[0] == 0
    blob = json.loads(open(out).read())
    entry = int(blob["stages"][1]["matrix"][0][0])
    blob["stages"][1]["matrix"][0][0] = str(entry + 1)
    open(out, "w").write(json.dumps(blob))
    code, stdout = run_cli("verify", "-i", out)
    assert code == 4
    report = json.loads(stdout)
    assert not report["ok"]
    assert any(f["stage"] == 2 for f in report["failures"])


def test_build_schema_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, stdout = run_cli("build", "ecs", "-i", str(bad),
                           "-o", str(tmp_path / "x.json"))
    assert code == 2
    assert json.loads(stdout)["error"] == "SchemaError"


def test_build_missing_file(tmp_path):
    code, stdout = run_cli("build", "ecs", "-i", str(tmp_path / "none.json"),
                           "-o", str(tmp_path / "x.json"))
    assert code == 5


def test_build_lambda_too_small(tmp_path):
    inp = write(tmp_path, "in.json",
                {"k": 2, "lambda": 2, "rho": [1, 1], "p_seq": [5, 9]})
    code, stdout = run_cli("build", "ecrs", "-i", inp,
                           "-o", str(tmp_path / "x.json"))
    assert code == 3
    payload = json.loads(stdout)
    assert payload["error"] == "LambdaTooSmall"
    assert "rank" in payload["message"]


def test_decide_command(tmp_path):
    group = write(tmp_path, "g.json", {"finite": {"2": 3, "5": 2},
                                       "infinite": []})
    code, stdout = run_cli("decide", "--rank", "3", "--group", group,
                           "--lambda", "2")
    assert code == 0
    decision = json.loads(stdout)
    assert decision["exists"] is False
    assert decision["reason"] == "rank-exceeds-index"

    group2 = write(tmp_path, "g2.json", {"finite": {}, "infinite": [2]})
    code, stdout = run_cli("decide", "--rank", "inf", "--group", group2,
                           "--lambda", "4")
    assert json.loads(stdout)["exists"] is True


def test_telescope_command(tmp_path):
    inp = write(tmp_path, "in.json", ECS_INPUT)
    built = str(tmp_path / "out.json")
    assert run_cli("build", "ecs", "-i", inp, "-o", built)[0] == 0

    tel = str(tmp_path / "tel.json")
    code, stdout = run_cli("telescope", "-i", built, "--cuts", "1,3", "-o", tel)
    assert code == 0
    result = json.loads(stdout)
    assert result["lost_flags"] == []
    code, stdout = run_cli("verify", "-i", tel)
    assert code == 0
    report = json.loads(stdout)
    values = [st["designed_value"] for st in report["stages"]]
    assert values == ["35", "11"]       # column sums multiply

    # trivial cuts reproduce the input stages
    code, stdout = run_cli("telescope", "-i", built, "--cuts", "1,2,3",
                           "-o", str(tmp_path / "t2.json"))
    assert code == 0
    assert json.loads(open(tmp_path / "t2.json").read())["stages"] == \
        json.loads(open(built).read())["stages"]

    code, stdout = run_cli("telescope", "-i", built, "--cuts", "5",
                           "-o", str(tmp_path / "t3.json"))
    assert code == 3


def test_verify_handwritten_stationary_ecrs(tmp_path):
    blob = {
        "version": "1",
        "kind": "realization",
        "properties": {"ecs": True, "ers": True, "ecrs": True},
        "stages": [{"matrix": [["1", "2"], ["2", "1"]], "p": "3"},
                   {"matrix": [["1", "2"], ["2", "1"]], "p": "3"}],
        "markers": [["1", "1"], ["1", "1"], ["1", "1"]],
        "provenance": {"source": "hand-written"},
    }
    path = tmp_path / "stationary.json"
    path.write_text(json.dumps(blob))
    code, stdout = run_cli("verify", "-i", str(path))
    assert code == 0
    report = json.loads(stdout)
    assert report["derived"] == {"ecs": True, "ers": True, "ecrs": True}


def test_telescope_preserves_ecrs(tmp_path):
    inp = write(tmp_path, "in.json", ECRS_INPUT)
    built = str(tmp_path / "out.json")
    assert run_cli("build", "ecrs", "-i", inp, "-o", built)[0] == 0
    tel = str(tmp_path / "tel.json")
    code, stdout = run_cli("telescope", "-i", built, "--cuts", "1", "-o", tel)
    assert code == 0
    result = json.loads(stdout)
    assert result["properties"]["ecrs"] is True
    assert run_cli("verify", "-i", tel)[0] == 0
