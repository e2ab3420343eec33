import csv
import json

import pytest

from levykit import cli, reproduce

CAUCHY_PAIR = {"compound_poisson": {"variant": "law", "rate": 1.0, "law": {"law": "abs_cauchy"},
                                    "exponents": [1.0, -1.0]}}
MIXTURE = {"alpha": 0.5, "g": {"family": "exp_decay", "rate": 1.0, "level": 1.0},
           "components": [{"gamma": 2.0, "scale": 1.0}, {"gamma": 2.0, "scale": 1.0}]}
GH = {"gh": {"mu": [0.0, 0.0], "beta": [0.5, 0.0], "delta": [[1.0, 0.0], [0.0, 1.0]],
             "mixing": {"lambda": -0.5, "xi": 1.0, "psi": 1.0}}}


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def _run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_sd_mixture(tmp_path, capsys):
    spec = _write(tmp_path, "s.json", {"mixture": MIXTURE})
    code, out, _ = _run(["check-sd", "--spec", spec], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["is_sd"] is False and rep["verdict"]["numeric_violation"] is not None
    code, out, _ = _run(["check-sd", "--spec", spec, "--no-numeric"], capsys)
    assert json.loads(out)["verdict"]["numeric_checked"] is False


def test_check_sd_gh_and_report_round_trip(tmp_path, capsys):
    spec = _write(tmp_path, "gh.json", GH)
    out_file = tmp_path / "rep.json"
    assert cli.main(["check-sd", "--spec", spec, "--out", str(out_file)]) == 0
    rep = json.loads(out_file.read_text())
    # the recorded input is itself a valid spec
    again = _write(tmp_path, "again.json", rep["input"])
    code, out, _ = _run(["check-sd", "--spec", again], capsys)
    assert code == 0 and json.loads(out)["verdict"] == rep["verdict"]


def test_moment_verdict_and_mc(tmp_path, capsys):
    spec = _write(tmp_path, "m.json", {"triplet": CAUCHY_PAIR, "tau": 1.0, "q": [1.0, 1.0]})
    code, out, _ = _run(["moment", "--spec", spec, "--mc", "--budget", "20000", "--seed", "3"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["verdict"]["status"] == "Infinite"
    assert rep["mc"]["n"] == 20000 and rep["mc"]["seed"] == 3
    # the report's triplet parses back to the same triplet
    again = _write(tmp_path, "m2.json", rep["input"])
    code, out2, _ = _run(["moment", "--spec", again], capsys)
    assert json.loads(out2)["input"] == rep["input"]


def test_sample_csv_deterministic(tmp_path, capsys):
    spec = _write(tmp_path, "s.json", {"mixture": MIXTURE})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for f in (a, b):
        assert cli.main(["sample", "--spec", spec, "--budget", "50", "--seed", "9", "--out", str(f)]) == 0
    assert a.read_text() == b.read_text()
    rows = list(csv.reader(a.open()))
    assert rows[0] == ["Z1", "Z2", "Z3"] and len(rows) == 51
    assert all(float(r[0]) > 0 for r in rows[1:])
    side = json.loads((tmp_path / "a.csv.json").read_text())
    assert side["seed"] == 9 and side["n"] == 50


def test_sample_gh_json(tmp_path, capsys):
    spec = _write(tmp_path, "gh.json", GH)
    code, out, _ = _run(["sample", "--spec", spec, "--budget", "5", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0 and len(rep["rows"]) == 5 and rep["columns"] == ["Z1", "Z2"]


def test_levy_density_grid(tmp_path, capsys):
    spec = _write(tmp_path, "d.json", {"mixture": MIXTURE, "grid": {"y1": [0.5, 1.0], "transverse": [0.0, 1.0]}})
    code, out, _ = _run(["levy-density", "--spec", spec], capsys)
    rows = list(csv.reader(out.splitlines()))
    assert code == 0
    assert rows[0] == ["y1", "y2", "y3", "h"] and len(rows) == 1 + 2 * 2 * 2
    assert all(float(r[-1]) > 0 for r in rows[1:])


def test_reproduce_pass(capsys):
    code, out, err = _run(["reproduce", "example1"], capsys)
    assert code == 0 and json.loads(out)["status"] == "PASS" and "PASS" in err


def test_reproduce_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(reproduce, "run_fixture", lambda name, seed=None: {"name": name, "status": "FAIL"})
    assert _run(["reproduce", "example1"], capsys)[0] == 4


@pytest.mark.parametrize("content", ["{not json", "[1, 2]",
                                     json.dumps({"mixture": {**MIXTURE, "alpha": 2.0}}),
                                     json.dumps({"mixture": {"alpha": 0.5}})])
def test_parse_errors_exit_2(tmp_path, capsys, content):
    spec = _write(tmp_path, "bad.json", content)
    code, _, err = _run(["check-sd", "--spec", spec], capsys)
    assert code == 2 and "parse error" in err


def test_missing_file_and_unknown_name(capsys):
    assert _run(["check-sd", "--spec", "/nonexistent/spec.json"], capsys)[0] == 2
    assert _run(["reproduce", "nosuch"], capsys)[0] == 2


def test_numeric_failure_exit_3(tmp_path, capsys):
    spec = _write(tmp_path, "m.json", {"triplet": CAUCHY_PAIR, "tau": -1.0, "q": [1.0, 1.0]})
    code, _, err = _run(["moment", "--spec", spec], capsys)
    assert code == 3 and "TauNonPositive" in err


def test_seed_must_be_u64(capsys):
    with pytest.raises(SystemExit):
        cli.main(["reproduce", "example1", "--seed", "-1"])
