import json
import math

import pytest

from cohen_norms.cli import run

ID2 = {
    "type": "linear",
    "domains": [{"dim": 2, "q": 2}],
    "codomain": {"dim": 2, "q": 2},
    "coefficients": [[1, 0], [0, 1]],
}


@pytest.fixture
def files(tmp_path):
    op = tmp_path / "id2.json"
    op.write_text(json.dumps(ID2))
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"space": {"dim": 2, "q": 2}, "members": [[1, 0], [0, 1]]}))
    return tmp_path, str(op), str(fam)


def report(path):
    return json.loads(open(path).read())


def test_estimate_dp_identity(files):
    d, op, _ = files
    out = str(d / "r.json")
    assert run(["estimate", "dp", "--op", op, "--p", "2", "--seed", "7", "--out", out]) == 0
    rep = report(out)
    assert set(rep) >= {"version", "config", "results", "wall_ms", "status"}
    row = rep["results"][0]
    assert row["lower"] <= math.sqrt(2) * (1 + 1e-9) and row["upper"] >= math.sqrt(2) * (1 - 1e-9)
    assert row["lower"] == pytest.approx(math.sqrt(2), rel=0.05)
    assert rep["config"]["seed"] == 7 and rep["wall_ms"] is None and rep["status"] == "pass"


def test_norm_strong(files):
    d, _, fam = files
    out = str(d / "r.json")
    assert run(["norm", "strong", "--family", fam, "--p", "1", "--out", out]) == 0
    assert report(out)["results"][0]["value"] == 2.0


def test_norm_weak_and_cohen(files):
    d, _, fam = files
    out = str(d / "r.json")
    assert run(["norm", "weak", "--family", fam, "--p", "2", "--out", out]) == 0
    assert report(out)["results"][0]["value"] == pytest.approx(1.0)
    assert run(["norm", "cohen", "--family", fam, "--p", "2", "--out", out]) == 0
    assert report(out)["results"][0]["lower"] >= math.sqrt(2) - 1e-12


def test_suite_holder_exit_zero(files):
    d, _, _ = files
    out = str(d / "h.json")
    assert run(["suite", "holder", "--trials", "1000", "--seed", "1", "--out", out]) == 0
    rows = report(out)["results"]
    assert len(rows) == 1000 and all(r["passed"] for r in rows)
    assert set(rows[0]) == {"name", "passed", "margin", "seed", "digest"}


def test_exit_code_one_on_inverted_bracket(files, monkeypatch):
    import cohen_norms.cli as cli

    d, op, _ = files
    monkeypatch.setattr(cli, "_upper", lambda op, p, cfg: 0.5)
    assert run(["estimate", "dp", "--op", op, "--p", "2", "--out", str(d / "r.json")]) == 1
    assert report(str(d / "r.json"))["results"][0]["inverted"] is True


def test_exit_code_one_on_failed_check(files, monkeypatch):
    import cohen_norms.suites as suites

    d, _, _ = files
    failing = lambda seed, index, settings=None: suites.CheckResult("x", False, -1.0, "d", seed)
    monkeypatch.setitem(suites.SUITES, "holder", {"holder": failing})
    assert run(["suite", "holder", "--trials", "2", "--out", str(d / "r.json")]) == 1
    assert report(str(d / "r.json"))["status"] == "fail"


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["estimate", "dp"],
        ["estimate", "dp", "--op", "missing.json", "--p", "2"],
        ["estimate", "dp", "--p", "0.5"],
        ["suite", "holder", "--seed", "-1"],
        ["suite", "holder", "--trials", "0"],
        ["estimate", "dp", "--p", "2", "--pstar", "3"],
    ],
)
def test_exit_code_two_on_usage_errors(argv, capsys):
    assert run(argv) == 2
    assert "error" in capsys.readouterr().err


def test_ragged_document_diagnostic(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"type": "linear", "domains": [{"dim": 2, "q": 2}], "codomain": {"dim": 2, "q": 2},\n"coefficients": [[1, 0],\n[0]]}')
    assert run(["estimate", "dp", "--op", str(bad), "--p", "2"]) == 2
    err = capsys.readouterr().err
    assert "line 3" in err and "coefficients[1]" in err


def test_asymmetric_polynomial_warning(tmp_path, capsys):
    doc = tmp_path / "p.json"
    doc.write_text(
        json.dumps(
            {
                "type": "polynomial",
                "domains": [{"dim": 2, "q": 2}],
                "codomain": {"dim": 1, "q": 2},
                "coefficients": [[[1, 1], [0, 1]]],
            }
        )
    )
    out = tmp_path / "r.json"
    assert run(["estimate", "poly", "--op", str(doc), "--p", "2", "--restarts", "2", "--grid", "16", "--out", str(out)]) == 0
    assert "symmetriz" in capsys.readouterr().err
    assert report(str(out))["warnings"]


def test_seed_from_environment(files, monkeypatch):
    d, _, _ = files
    monkeypatch.setenv("COHEN_NORMS_SEED", "99")
    out = str(d / "r.json")
    assert run(["suite", "holder", "--trials", "3", "--out", out]) == 0
    assert report(out)["config"]["seed"] == 99


def test_config_precedence(files):
    d, _, _ = files
    cfg = d / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "trials": 4}))
    out = str(d / "r.json")
    assert run(["suite", "holder", "--config", str(cfg), "--trials", "2", "--out", out]) == 0
    rep = report(out)
    assert rep["config"]["seed"] == 5 and rep["config"]["trials"] == 2 and len(rep["results"]) == 2


def test_csv_output(files):
    d, _, _ = files
    out = d / "r.csv"
    assert run(["suite", "holder", "--trials", "3", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "name,passed,margin,seed,digest" and len(lines) == 4


def test_timing_flag(files):
    d, _, _ = files
    out = str(d / "r.json")
    assert run(["suite", "holder", "--trials", "2", "--timing", "--out", out]) == 0
    assert report(out)["wall_ms"] > 0


def test_oracles_and_experiment(files):
    d, op, _ = files
    out = str(d / "r.json")
    assert run(["oracle", "pi", "--op", op, "--p", "2", "--grid", "32", "--out", out]) == 0
    assert report(out)["results"][0]["upper"] == pytest.approx(math.sqrt(2), rel=0.05)
    assert run(["oracle", "adjoint-dp", "--op", op, "--p", "2", "--grid", "32", "--out", out]) == 0
    assert run(["oracle", "brute", "--op", op, "--p", "2", "--grid", "32", "--out", out]) == 0
    assert report(out)["results"][0]["value"] == pytest.approx(math.sqrt(2), rel=0.02)
    assert run(["experiment", "gamma", "--op", op, "--pstar", "2", "--out", out]) == 0
    qs = [row["q"] for row in report(out)["results"][0]["table"]]
    assert qs == [2.0, 3.0, 4.0]


def test_identical_runs_are_byte_identical(files):
    d, op, _ = files
    a, b = d / "a.json", d / "b.json"
    for path in (a, b):
        assert run(["estimate", "coh", "--op", op, "--p", "2", "--seed", "3", "--grid", "16", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
