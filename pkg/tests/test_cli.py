import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from nonlocality.cli import SUBCOMMANDS, main
from nonlocality.report import Check, ExperimentReport, emit, report_from_json


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def sample_report():
    rep = ExperimentReport("demo", {"n": 3, "state": None}, 7, "pcg64")
    rep.analytic["x"] = np.float64(0.1) + 0.2
    rep.add_empirical("rate", 0.75, 1000, 0.0137)
    rep.check("exact", 1.0, 1.0, 0.0)
    rep.check("sampled", 0.74, 0.75, 5.0, comparison="sigma", sigma=0.0137, runs=1000, provenance="published")
    rep.check("bound", 2.9, 3.0, 0.0, comparison="le")
    return rep


def test_json_round_trip():
    rep = sample_report()
    assert report_from_json(emit(rep, "json")) == rep.to_dict()


def test_csv_rows_equal_checks():
    rep = sample_report()
    rows = list(csv.reader(io.StringIO(emit(rep, "csv"))))
    assert len(rows) - 1 == len(rep.checks)
    assert float(rows[2][2]) == 0.74


def test_pass_fail_is_computed():
    assert Check("a", 1.0, 1.1, 0.05).passed is False
    assert Check("b", 3.0, 3.0, 0.0, comparison="ge").passed
    assert not Check("c", 0.5, 1.0, 5, comparison="sigma", sigma=0.05, runs=10).passed
    with pytest.raises(ValueError):
        Check("d", 0, 0, 0, comparison="sigma")
    with pytest.raises(ValueError):
        Check("e", 0, 0, 0, provenance="hearsay")


def test_every_check_names_provenance_and_tolerance(capsys):
    code, out, _ = run(["temporal", "--runs", "2000"], capsys)
    data = json.loads(out)
    assert code == 0 and data["passed"]
    for c in data["checks"]:
        assert c["provenance"] in ("published", "oracle", "trivial") and "tolerance" in c
    for e in data["empirical"].values():
        assert e["runs"] > 0 and "sigma" in e


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_subcommands_pass_and_are_byte_stable(cmd, capsys):
    argv = [cmd, "--seed", "11", "--runs", "3000"]
    code1, out1, _ = run(argv, capsys)
    code2, out2, _ = run(argv, capsys)
    assert code1 == code2 == 0
    assert out1 == out2


def test_chsh_example(capsys):
    code, out, _ = run(["chsh", "--state", "singlet", "--seed", "7"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["analytic"]["quantum_max_sum"] == pytest.approx(2 + 2**0.5, abs=1e-6)
    assert data["analytic"]["quantum_max_prob-difference"] == pytest.approx(2**0.5 - 1, abs=1e-6)


def test_wwzb_n4_example(capsys):
    code, out, _ = run(["wwzb", "--n", "4", "--state", "ghz"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["analytic"]["n_inequalities"] == 65536 and data["analytic"]["violated"]


def test_qrac_example(capsys):
    code, out, _ = run(["qrac", "--runs", "100000", "--seed", "1"], capsys)
    data = json.loads(out)
    assert code == 0
    assert abs(data["empirical"]["hv_success"]["value"] - 0.8536) < 0.01


def test_tolerance_failure_exit_code(capsys):
    # the optimizer lands within ~1e-16 of the closed form, not within 1e-30
    code, out, _ = run(["chsh", "--tol", "1e-30"], capsys)
    assert code == 1 and json.loads(out)["passed"] is False


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as e:
        main(["nope"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["chsh", "--bogus"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["chsh", "--tol", "-1"])
    assert e.value.code == 2


def test_invalid_state_file_exit_three(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    entries = [[0.0, 0.0]] * 16
    entries[0] = [1.0, 0.0]
    entries[15] = [2.0, 0.0]
    bad.write_text(json.dumps({"dims": [2, 2], "matrix": entries}))
    code, out, err = run(["chsh", "--state", str(bad)], capsys)
    assert code == 3 and out == "" and "trace" in err


def test_unknown_preset_exit_three(capsys):
    code, _, _ = run(["chsh", "--state", "bogus"], capsys)
    assert code == 3


def test_out_file_and_csv(tmp_path, capsys):
    path = tmp_path / "r.csv"
    code, out, _ = run(["prbox", "--format", "csv", "--out", str(path)], capsys)
    assert code == 0 and out == ""
    assert path.read_text().startswith("experiment,check,value")


def test_console_entry_point_subprocess():
    res = subprocess.run([sys.executable, "-m", "nonlocality.cli", "ghz", "--seed", "2", "--runs", "500"],
                         capture_output=True, text=True, check=False)
    res2 = subprocess.run([sys.executable, "-m", "nonlocality.cli", "ghz", "--seed", "2", "--runs", "500"],
                          capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout == res2.stdout
