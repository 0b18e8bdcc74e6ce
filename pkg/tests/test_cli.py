import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from rg2flow.cli import (EXIT_CONFIG, EXIT_OK, EXIT_SEPARATRIX, EXIT_VALIDATION, build_parser, main)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_sol_flow_example(tmp_path):
    rc = main(["flow", "--mode", "lrs", "--geometry", "SOL", "--alpha", "0", "--initial", "1", "1",
               "--t-max", "1", "--out", str(tmp_path)])
    assert rc == EXIT_OK
    header, rows = read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "x", "y"]
    t, A, B = map(float, rows[-1])
    assert t == 1.0
    assert A == pytest.approx(1.0, abs=1e-8)
    assert B == pytest.approx(9.0, abs=1e-8)
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    for key in ("termination", "t_end", "singular_time_estimate", "terminal_state",
                "predicted_regime", "observed_regime", "agree"):
        assert key in verdict
    assert (tmp_path / "trajectory.svg").read_text().lstrip().startswith("<?xml")


def test_r3_constant(tmp_path):
    assert main(["--out", str(tmp_path), "flow", "--mode", "full3d", "--geometry", "R3", "--alpha", "2",
                 "--initial", "1", "2", "3", "--t-max", "5"]) == EXIT_OK
    header, rows = read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "A", "B", "C"]
    y = np.array(rows, dtype=float)[:, 1:]
    assert np.all(y == [1.0, 2.0, 3.0])
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["termination"] == "ReachedTMax"
    assert verdict["observed_regime"] == "FixedPoint" and verdict["agree"]


@pytest.mark.parametrize("alpha", ["0", "0.4", "3"])
def test_nil_ratio_every_row(tmp_path, alpha):
    assert main(["flow", "--mode", "full3d", "--geometry", "NIL", "--alpha", alpha, "--initial", "1", "2", "3",
                 "--t-max", "2", "--outputs", "csv", "--out", str(tmp_path)]) == EXIT_OK
    _, rows = read_csv(tmp_path / "trajectory.csv")
    y = np.array(rows, dtype=float)
    assert np.max(np.abs(y[:, 2] / y[:, 3] - 2 / 3)) < 1e-10


def test_const_curv_header(tmp_path):
    assert main(["flow", "--mode", "const_curv", "--K", "1", "--alpha", "1", "--initial", "1",
                 "--out", str(tmp_path), "--outputs", "csv,json"]) == EXIT_OK
    header, _ = read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "phi"]
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["termination"] == "Extinction"
    assert verdict["singular_time_estimate"] == pytest.approx(0.11267346391648628, abs=1e-6)


def test_csv_precision(tmp_path):
    main(["flow", "--geometry", "NIL", "--alpha", "1", "--initial", "1.1", "2", "--t-max", "0.5",
          "--outputs", "csv", "--out", str(tmp_path)])
    _, rows = read_csv(tmp_path / "trajectory.csv")
    assert max(len(v.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) for v in rows[-1]) >= 12


def test_flow_deterministic(tmp_path):
    args = ["flow", "--geometry", "SU2", "--alpha", "1", "--initial", "1", "2", "--outputs", "csv"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_config_errors_exit_2(tmp_path):
    assert main(["flow", "--geometry", "FOO", "--initial", "1", "1", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["flow", "--geometry", "NIL", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["--config", str(tmp_path / "nope.json"), "flow"]) == EXIT_CONFIG
    assert main(["portrait", "--mode", "full3d", "--geometry", "NIL", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["separatrix", "--alpha", "0", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["--threads", "0", "portrait", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_config_file(tmp_path):
    cfg = {"schema_version": 1, "geometry": "SOL", "mode": "lrs", "alpha": 0, "initial": [1, 1],
           "integrator": {"t_max": 1.0}, "outputs": ["csv"], "out_dir": str(tmp_path / "run")}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["--config", str(path), "flow"]) == EXIT_OK
    _, rows = read_csv(tmp_path / "run" / "trajectory.csv")
    assert float(rows[-1][2]) == pytest.approx(9.0, abs=1e-8)


def portrait(tmp_path, *extra):
    return main(["portrait", "--out", str(tmp_path), "--threads", "1", *extra])


def test_portrait_nil(tmp_path):
    rc = portrait(tmp_path, "--geometry", "NIL", "--alpha", "1", "--x", "0.1:3:6:log", "--y", "0.1:3:6:log")
    assert rc == EXIT_OK
    header, rows = read_csv(tmp_path / "portrait.csv")
    assert header == ["x0", "y0", "predicted", "observed", "agree", "t_end", "singular_time"]
    assert len(rows) == 36
    assert all(r[4] == "true" for r in rows)
    # agreement column is recomputable from the other columns
    for r in rows:
        assert (r[2] == r[3]) == (r[4] == "true")
    assert (tmp_path / "portrait.svg").exists()
    summary = json.loads((tmp_path / "portrait.json").read_text())
    assert summary["agreement_fraction"] == 1.0


def test_portrait_sol_boundary_within_one_cell(tmp_path):
    portrait(tmp_path, "--geometry", "SOL", "--alpha", "1", "--x", "0.5:2:3", "--y", "0.5:4:15", "--outputs", "csv")
    _, rows = read_csv(tmp_path / "portrait.csv")
    shrink = [float(r[1]) for r in rows if r[3] == "ShrinkerFiniteTime"]
    cigar = [float(r[1]) for r in rows if r[3] == "CigarImmortal"]
    cell = 3.5 / 14
    assert max(shrink) <= 2.0 and 2.0 - max(shrink) <= cell
    assert min(cigar) >= 2.0 and min(cigar) - 2.0 <= cell


def test_portrait_su2_all_shrink(tmp_path):
    portrait(tmp_path, "--geometry", "SU2", "--alpha", "1", "--x", "0.2:2:4", "--y", "0.2:2:4", "--outputs", "csv")
    _, rows = read_csv(tmp_path / "portrait.csv")
    assert all(r[2] == r[3] == "ShrinkerFiniteTime" for r in rows)


def test_portrait_sl2r_and_jitter(tmp_path):
    args = ("--geometry", "SL2R", "--alpha", "1", "--x", "0.2:3:4:log", "--y", "0.5:5:4:log", "--outputs", "csv")
    assert portrait(tmp_path / "a", *args, "--seed", "7") == EXIT_OK
    assert portrait(tmp_path / "b", *args, "--seed", "7") == EXIT_OK
    assert portrait(tmp_path / "c", *args) == EXIT_OK
    a = (tmp_path / "a" / "portrait.csv").read_bytes()
    assert a == (tmp_path / "b" / "portrait.csv").read_bytes()
    assert a != (tmp_path / "c" / "portrait.csv").read_bytes()
    _, rows = read_csv(tmp_path / "a" / "portrait.csv")
    assert all(r[4] == "true" for r in rows)


def test_portrait_parallel_matches_serial(tmp_path):
    args = ["portrait", "--geometry", "NIL", "--alpha", "0.5", "--x", "0.2:2:3", "--y", "0.2:2:3",
            "--outputs", "csv"]
    assert main(args + ["--threads", "1", "--out", str(tmp_path / "s")]) == EXIT_OK
    assert main(args + ["--threads", "2", "--out", str(tmp_path / "p")]) == EXIT_OK
    assert (tmp_path / "s" / "portrait.csv").read_bytes() == (tmp_path / "p" / "portrait.csv").read_bytes()


def test_separatrix_command(tmp_path):
    assert main(["separatrix", "--alpha", "1", "--c-max", "5", "--out", str(tmp_path)]) == EXIT_OK
    header, rows = read_csv(tmp_path / "separatrix.csv")
    assert header == ["C", "A"]
    meta = json.loads((tmp_path / "separatrix.json").read_text())
    assert meta["lower_limit"] == pytest.approx(2.0, abs=1e-4)
    assert meta["achieved_gap"] < 1e-6
    assert {"alpha", "n_reached"} <= set(meta)
    s = np.array(rows, dtype=float)
    assert np.all(np.diff(s[:, 0]) > 0)
    assert np.all(np.diff(s[s[:, 0] > 0.01, 1]) > 0)


def test_separatrix_nonconvergence_exit_4(tmp_path):
    assert main(["separatrix", "--alpha", "1", "--tol", "1e-14", "--max-n", "4096", "--out", str(tmp_path)]) == EXIT_SEPARATRIX
    meta = json.loads((tmp_path / "separatrix.json").read_text())
    assert meta["converged"] is False and meta["achieved_gap"] > 1e-14


def test_validate_perturbed_fails(tmp_path):
    rc = main(["validate", "--perturb-rhs", "--only", "geometry.assembly_identity", "--out", str(tmp_path)])
    assert rc == EXIT_VALIDATION
    rep = json.loads((tmp_path / "validation_report.json").read_text())
    assert rep["perturbed_rhs"] and not rep["checks"][0]["passed"]


def test_validate_selected_checks_pass(tmp_path):
    names = ["geometry.assembly_identity", "flows.assembly_consistency",
             "oracles.reference_values"]
    assert main(["validate", "--only", *names, "--out", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "validation_report.json").read_text())
    assert [c["name"] for c in rep["checks"]] == names


def test_full_validate_report_lists_every_check(tmp_path):
    from rg2flow.validation import ACCEPTANCE, CHECKS
    rc = main(["validate", "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "validation_report.json").read_text())
    names = [c["name"] for c in rep["checks"]]
    assert names == list(CHECKS) + list(ACCEPTANCE)
    assert len(set(names)) == len(names)
    failed = {c["name"] for c in rep["checks"] if not c["passed"]}
    # the only failing check is the isotropization criterion that cannot hold for alpha = 1
    assert failed == {"acceptance.07_su2_theorem"}
    assert rc == EXIT_VALIDATION


def test_help_documents_defaults():
    text = build_parser().format_help()
    assert "schema_version" in text and "rel_tol" in text and "exit status" in text


def test_console_script_runs(tmp_path):
    out = subprocess.run([sys.executable, "-m", "rg2flow.cli", "flow", "--geometry", "SOL", "--alpha", "0",
                          "--initial", "1", "1", "--t-max", "1", "--outputs", "csv", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert json.loads(out.stdout)["termination"] == "ReachedTMax"
