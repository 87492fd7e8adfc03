import csv
import json

import pytest

from strgreedy import GreedyTrace, compute_bounds
from strgreedy import experiment
from strgreedy.bounds import BoundCheck, Certification
from strgreedy.cli import main


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj, indent=2))
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


SMALL_COVERAGE = {"problem": "coverage", "horizon": 3,
                  "grid": {"width": 6, "height": 5, "lambda": 1.0, "mass_kind": "linear"},
                  "run_oracle": False}


def test_run_table1(tmp_path, capsys):
    assert main(["run", "--config", "bundled:table1", "--out", str(tmp_path)]) == 0
    (row,) = read_rows(tmp_path / "summary.csv")
    assert float(row["beta2"]) == pytest.approx(0.7816, abs=5e-5)
    assert float(row["beta0"]) == pytest.approx(0.6321, abs=5e-5)
    assert float(row["ratio"]) == 1.0
    assert (row["a1"], row["a2"], row["a3"]) == ("holds",) * 3
    assert row["runtime_ms"] == ""
    out = capsys.readouterr().out
    assert "reference beta1: printed 0.5893" in out and "MISMATCH" in out


def test_run_timing_fills_column(tmp_path):
    assert main(["run", "--config", "bundled:table1", "--out", str(tmp_path), "--timing"]) == 0
    (row,) = read_rows(tmp_path / "summary.csv")
    assert float(row["runtime_ms"]) >= 0


def test_horizon_one(tmp_path):
    cfg = write(tmp_path, "k1.json", {"problem": "scheduling", "horizon": 1,
                                      "matrix": [[0.3], [0.5], [0.1]]})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    (row,) = read_rows(tmp_path / "o" / "summary.csv")
    assert row["beta1"] == "1" and row["beta2"] == "1"
    assert row["alpha_G"] == ""
    assert float(row["f_greedy"]) == 0.5


@pytest.mark.parametrize("cfg,needle", [
    ({"problem": "knapsack"}, "field 'problem'"),
    ({"problem": "scheduling", "matrix": [[0.2, 0.1], [0.3, 0.2]], "horizon": 5},
     "field 'horizon'"),
    ({"problem": "scheduling", "matrix": [[1.5, 0.1], [0.3, 0.2]]}, "field 'matrix'"),
    ({"problem": "coverage", "horizon": 2, "grid": {"width": 3, "height": 2}},
     "field 'grid.lambda'"),
    ({"problem": "scheduling", "matrix": [[0.2]], "oracle_cap": -1}, "field 'oracle_cap'"),
    ({"problem": "scheduling", "matrix": [[0.2]], "bogus": 1}, "bogus"),
])
def test_config_errors(tmp_path, capsys, cfg, needle):
    assert main(["run", "--config", write(tmp_path, "c.json", cfg)]) == 1
    err = capsys.readouterr().err
    assert "config error" in err and needle in err
    assert "line " in err


def test_config_error_line_number(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text('{\n  "problem": "scheduling",\n  "matrix": [[0.2, 0.1], [0.3, 0.2]],\n'
                    '  "horizon": 7\n}\n')
    assert main(["run", "--config", str(path)]) == 1
    assert "line 4, field 'horizon'" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["run", "--config", "/nonexistent/x.json"],
    ["run", "--config", "bundled:no_such_fixture"],
    ["run"],
    ["frobnicate", "--config", "bundled:table1"],
])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_invalid_json(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text('{\n  "problem": \n}')
    assert main(["run", "--config", str(path)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_sweep_byte_identical(tmp_path):
    spec = write(tmp_path, "s.json", {"param": "lambda", "values": [0.5, 1, 2],
                                      "base": SMALL_COVERAGE})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", spec, "--out", str(a)]) == 0
    assert main(["sweep", "--config", spec, "--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()
    rows = read_rows(a)
    assert [r["param_value"] for r in rows] == ["0.5", "1", "2"]
    assert [r["lambda"] for r in rows] == ["0.5", "1", "2"]


def test_single_value_sweep_matches_run(tmp_path):
    base = dict(SMALL_COVERAGE, grid=dict(SMALL_COVERAGE["grid"], **{"lambda": 2.0}))
    spec = write(tmp_path, "s.json", {"param": "lambda", "values": [2.0], "base": base})
    cfg = write(tmp_path, "c.json", base)
    assert main(["sweep", "--config", spec, "--out", str(tmp_path / "s.csv")]) == 0
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
    (srow,) = read_rows(tmp_path / "s.csv")
    (rrow,) = read_rows(tmp_path / "r" / "summary.csv")
    srow.pop("param_value"), rrow.pop("param_value")
    assert srow == rrow


def test_k_sweep(tmp_path):
    spec = write(tmp_path, "s.json", {"param": "K", "values": [1, 2, 3],
                                      "base": SMALL_COVERAGE})
    assert main(["sweep", "--config", spec, "--out", str(tmp_path / "k.csv")]) == 0
    rows = read_rows(tmp_path / "k.csv")
    assert [r["K"] for r in rows] == ["1", "2", "3"]


@pytest.mark.parametrize("values", [[2, 1], [], ["a"], [1, 1]])
def test_bad_sweep_values(tmp_path, values):
    spec = write(tmp_path, "s.json", {"param": "K", "values": values, "base": SMALL_COVERAGE})
    assert main(["sweep", "--config", spec]) == 1


def test_report_round_trip(tmp_path):
    assert main(["run", "--config", "bundled:table1", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    trace = GreedyTrace.from_dict(report["trace"])
    again = compute_bounds(trace).to_dict()
    for name in ("beta0", "beta_nemhauser", "beta1", "beta2", "beta_stepwise", "alpha_G"):
        assert again[name] == pytest.approx(report["bounds"][name], abs=1e-12)
    assert report["trace"]["chosen"] == [0, 1, 2]
    assert report["optimum"]["best_value"] == pytest.approx(0.42208, abs=1e-12)


def test_verify_table1(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verify", "--config", "bundled:table1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["certification"]["ok"] is True
    assert "beta2" in capsys.readouterr().out


def test_verify_a1_failure_is_not_an_error(tmp_path, capsys):
    # greedy takes agent 0 at stage 1, which the optimum needs at stage 2
    cfg = write(tmp_path, "c.json", {"problem": "scheduling",
                                     "matrix": [[0.5, 0.9], [0.4, 0.1], [0.1, 0.1]]})
    assert main(["verify", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "A1=fails" in out
    assert "FAIL " not in out


def test_verify_cap_is_fatal(capsys):
    assert main(["verify", "--config", "bundled:table1", "--oracle-cap", "10"]) == 1
    assert "exceeds cap" in capsys.readouterr().err


def test_run_cap_downgrades(tmp_path, capsys):
    assert main(["run", "--config", "bundled:table1", "--oracle-cap", "10",
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["optimum"] is None and report["certification"] is None
    assert any("oracle skipped" in w for w in report["warnings"])
    (row,) = read_rows(tmp_path / "summary.csv")
    assert row["ratio"] == "" and row["a1"] == "not-checkable"


def test_certification_failure_exit_code(monkeypatch):
    def broken(trace, optimum, bounds, assumptions, tol=1e-9):
        return Certification(0.5, 0.5, 1.0, (BoundCheck("beta2", 0.9, True, False, -0.4),))
    monkeypatch.setattr(experiment, "certify", broken)
    assert main(["run", "--config", "bundled:table1"]) == 2
    assert main(["verify", "--config", "bundled:table1"]) == 2


def test_verify_small_batch(tmp_path, capsys):
    cfg = write(tmp_path, "b.json", {"problem": "scheduling", "seed": 3,
                                     "batch": {"count": 20, "N_max": 4, "K_max": 3,
                                               "value_range": [0.05, 0.95]}})
    assert main(["verify", "--config", cfg]) == 0
    assert "instances: 20" in capsys.readouterr().out
