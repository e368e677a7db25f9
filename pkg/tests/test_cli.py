import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from helpers import FIXTURES, load_fixture
from surveyps import EstimandSpec, PsSpec, Tilt, estimate
from surveyps.cli import main
from surveyps.simulation import RESULT_COLUMNS

TOY12 = FIXTURES / "toy12.csv"
BASE = ["--input", str(TOY12), "--treatment", "z", "--outcome", "y", "--weight", "w", "--covariates", "x1,x2"]


def run_cli(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_toy12_overlap_wet_matches_library_and_oracle(capsys, toy12, toy12_oracle, mest_oracle):
    code, out, _ = run_cli(capsys, "estimate", *BASE, "--estimand", "ato", "--estimator", "wet", "--ps-mode", "w")
    assert code == 0
    result = json.loads(out)["results"][0]
    lib = estimate(toy12, "wet", EstimandSpec(Tilt.OVERLAP), PsSpec("w"))
    assert result["tau"] == lib.tau and result["se"] == lib.se
    assert result["estimand_label"] == "PATO"
    assert result["tau"] == pytest.approx(toy12_oracle["estimands"]["ato"]["augmented"]["wet"]["tau"], abs=1e-11)
    assert result["se"] == pytest.approx(mest_oracle["toy12"]["wet/ato"]["se"], rel=1e-6)


def test_report_contents(capsys):
    code, out, _ = run_cli(capsys, "estimate", *BASE, "--estimand", "ate", "--estimand", "att",
                           "--estimator", "psw", "--estimator", "mom")
    assert code == 0
    payload = json.loads(out)
    assert [(r["estimand"], r["estimator"]) for r in payload["results"]] == [
        ("ate", "psw"), ("ate", "mom"), ("att", "psw"), ("att", "mom")]
    for r in payload["results"]:
        assert r["ci_low"] <= r["tau"] <= r["ci_high"]
        assert set(r) >= {"tau", "se", "ci_low", "ci_high", "components", "n_used"}
    assert payload["ps_diagnostics"]["e_sp"]["converged"]
    assert "e_fp" in payload["ps_diagnostics"]


def test_csv_output_round_trips(capsys, toy12):
    code, out, _ = run_cli(capsys, "estimate", *BASE, "--estimator", "cvr", "--format", "csv")
    assert code == 0
    row = next(csv.DictReader(out.splitlines()))
    lib = estimate(toy12, "cvr", EstimandSpec())
    assert float(row["tau"]) == lib.tau
    assert float(row["se"]) == lib.se


def test_missing_weight_column_writes_nothing(capsys, tmp_path):
    out = tmp_path / "report.json"
    args = ["estimate", "--input", str(TOY12), "--treatment", "z", "--outcome", "y",
            "--weight", "sw", "--covariates", "x1,x2", "--out", str(out)]
    code, stdout, err = run_cli(capsys, *args)
    assert code != 0
    assert json.loads(err)["error"] == "E_CONFIG"
    assert "sw" in json.loads(err)["message"]
    assert not out.exists() and stdout == ""
    assert list(tmp_path.iterdir()) == []


def test_failed_run_keeps_previous_output(capsys, tmp_path):
    out = tmp_path / "report.json"
    out.write_text("previous\n")
    code, _, _ = run_cli(capsys, "estimate", *BASE[:-1], "x1,nope", "--out", str(out))
    assert code == 2
    assert out.read_text() == "previous\n"


def test_repeated_runs_are_byte_identical(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run_cli(capsys, "estimate", *BASE, "--estimator", "mom", "--estimator", "wet",
                       "--estimand", "ato", "--out", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_overlap_balance_on_toy12(capsys):
    code, out, _ = run_cli(capsys, "balance", *BASE, "--estimand", "ato", "--ps-mode", "w")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["covariate"] for r in rows] == ["x1", "x2"]
    assert max(r["psmd"] for r in rows) <= 1e-6


def test_imbalanced_toy_shows_imbalance(capsys, tmp_path):
    case = load_fixture("oracle_imbalanced.json")
    path = tmp_path / "imbalanced.csv"
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["x1", "x2", "z", "y", "w"])
        writer.writeheader()
        writer.writerows(case["rows"])
    code, out, _ = run_cli(
        capsys, "balance", "--input", str(path), "--treatment", "z", "--outcome", "y", "--weight", "w",
        "--covariates", "x1,x2", "--ps-covariates", "x2", "--design", "pro", "--estimand", "ate",
    )
    assert code == 0
    rows = {r["covariate"]: r for r in json.loads(out)["rows"]}
    ref = case["psmd"][0]
    assert ref["psmd"] > 0.1
    assert rows["x1"]["psmd"] > 0.1
    assert rows["x1"]["psmd"] == pytest.approx(ref["psmd"], rel=1e-10)


@pytest.mark.parametrize(
    "extra",
    [
        ["--covariates", "x1,x1"],
        ["--covariates", "x1,w"],
        ["--covariates", "x1,x2", "--ps-covariates", "x3"],
    ],
)
def test_bad_column_mappings(capsys, extra):
    args = ["balance", "--input", str(TOY12), "--treatment", "z", "--outcome", "y", "--weight", "w", *extra]
    code, out, err = run_cli(capsys, *args)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "E_CONFIG"


def test_balance_needs_one_estimand(capsys):
    code, _, err = run_cli(capsys, "balance", *BASE, "--estimand", "ate", "--estimand", "ato")
    assert code == 2 and json.loads(err)["error"] == "E_CONFIG"


@pytest.mark.parametrize("value", ["NA", "", "1,5", "abc"])
def test_unparseable_values(capsys, tmp_path, value):
    text = TOY12.read_text().splitlines()
    cells = text[3].split(",")
    cells[0] = f'"{value}"'
    text[3] = ",".join(cells)
    path = tmp_path / "bad.csv"
    path.write_text("\n".join(text) + "\n")
    code, _, err = run_cli(capsys, "estimate", "--input", str(path), *BASE[2:])
    assert code == 2 and json.loads(err)["error"] == "E_PARSE"


def test_missing_input_file(capsys, tmp_path):
    code, _, err = run_cli(capsys, "estimate", "--input", str(tmp_path / "none.csv"), *BASE[2:])
    assert code == 2 and json.loads(err)["error"] == "E_PARSE"


def test_estimation_errors_carry_provenance(capsys, tmp_path):
    x = np.array([-3.0, -2, -1, -0.5, 0.5, 1, 2, 3])
    path = tmp_path / "separated.csv"
    lines = ["x,z,y,w"] + [f"{v},{int(v > 0)},{v},2" for v in x]
    path.write_text("\n".join(lines) + "\n")
    code, _, err = run_cli(capsys, "estimate", "--input", str(path), "--treatment", "z", "--outcome", "y",
                           "--weight", "w", "--covariates", "x")
    payload = json.loads(err)
    assert code == 1
    assert payload["error"] == "E_SEPARATION" and payload["arm"] == "e_sp"


def test_too_few_rows(capsys, tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text("\n".join(TOY12.read_text().splitlines()[:6]) + "\n")
    code, _, err = run_cli(capsys, "estimate", "--input", str(path), *BASE[2:])
    assert code == 2 and json.loads(err)["error"] == "E_CONFIG"


@pytest.mark.parametrize("args", [["estimate"], ["frobnicate"], ["estimate", *BASE, "--estimand", "xyz"]])
def test_usage_errors_are_json(capsys, args):
    code, _, err = run_cli(capsys, *args)
    assert code == 2 and json.loads(err)["error"] == "E_CONFIG"


def test_trim_out_of_range(capsys):
    code, _, err = run_cli(capsys, "estimate", *BASE, "--trim", "0.3")
    assert code == 2 and json.loads(err)["error"] == "E_CONFIG"


def test_truncated_estimand_uses_alpha(capsys):
    code, out, _ = run_cli(capsys, "estimate", *BASE, "--estimand", "trunc", "--alpha", "0.1")
    assert code == 0
    result = json.loads(out)["results"][0]
    assert result["alpha"] == 0.1 and result["estimand_label"] == "truncated PATE"


def write_scenario(tmp_path, body):
    path = tmp_path / "s.cfg"
    path.write_text(body)
    return str(path)


SCENARIO = """
units_per_cluster = 100
replications = 4
seed = 11
entry = psw, w, ato, Cor|Cor
entry = mom, w, ate, Mis|Cor
"""


def test_simulate_writes_metric_rows(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "simulate", write_scenario(tmp_path, SCENARIO))
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == list(RESULT_COLUMNS)
    assert len(rows) == 1 + 3


def test_shipped_scenario_columns(capsys):
    code, out, _ = run_cli(capsys, "simulate", "good_overlap", "--replications", "2")
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert list(rows[0]) == list(RESULT_COLUMNS)
    assert {r["spec"] for r in rows} >= {"Cor|Cor", "Mis|Cor"}


def test_simulate_unknown_key(capsys, tmp_path):
    code, _, err = run_cli(capsys, "simulate", write_scenario(tmp_path, SCENARIO + "speed = 3\n"))
    payload = json.loads(err)
    assert code == 2 and payload["error"] == "E_CONFIG" and "speed" in payload["message"]


def test_simulate_same_csv_across_worker_counts(capsys, tmp_path):
    path = write_scenario(tmp_path, SCENARIO)
    outputs = []
    for workers in ("1", "2", "1"):
        code, out, _ = run_cli(capsys, "simulate", path, "--workers", workers, "--seed", "5")
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1] == outputs[2]


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "surveyps", "estimate", *BASE, "--format", "csv", "--out", str(out)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("estimand,estimator,tau,se")
