import json

import pytest

from dimmax import cli, reports

import oracles


def run_cli(args):
    return cli.main(args)


def load(path):
    with open(path) as fh:
        return json.load(fh)


def test_evaluate_golden_mean(tmp_path):
    out = tmp_path / "run"
    code = run_cli(["evaluate", "--weights", "1.0", "--out-dir", str(out)])
    assert code == 0
    doc = load(out / "evaluate_report.json")
    reports.validate_report(doc)
    res = doc["results"]
    assert res["operator"]["entropy"] == 0.0
    assert res["operator"]["dimension"] == 0.0
    for method in ("operator", "cylinder"):
        assert res[method]["lyapunov"] == pytest.approx(oracles.GOLDEN_LYAPUNOV, abs=1e-9)
    assert res["agreement"]["within_errors"]


def test_evaluate_formats_and_figures(tmp_path):
    out = tmp_path / "all"
    assert run_cli(["evaluate", "--weights", "0.5,0.5", "--out-dir", str(out)]) == 0
    assert (out / "evaluate_report.json").exists()
    assert (out / "evaluate_weights.csv").exists()
    assert (out / "evaluate_weights.png").exists()
    header, row1, row2 = (out / "evaluate_weights.csv").read_text().splitlines()
    assert header == "k,p_k" and row1 == "1,0.5"

    out2 = tmp_path / "json-only"
    assert run_cli(["evaluate", "--weights", "0.5,0.5", "--format", "json",
                    "--out-dir", str(out2)]) == 0
    assert (out2 / "evaluate_report.json").exists()
    assert not (out2 / "evaluate_weights.csv").exists()
    assert not (out2 / "evaluate_weights.png").exists()

    out3 = tmp_path / "nofig"
    assert run_cli(["evaluate", "--weights", "0.5,0.5", "--no-figures",
                    "--out-dir", str(out3)]) == 0
    assert (out3 / "evaluate_weights.csv").exists()
    assert not (out3 / "evaluate_weights.png").exists()


def test_optimize_two_digit_oracle(tmp_path):
    out = tmp_path / "opt2"
    code = run_cli(["optimize", "--n", "2", "--tol", "1e-8", "--out-dir", str(out)])
    assert code == 0
    doc = load(out / "optimize_report.json")
    reports.validate_report(doc)
    _, d_star = oracles.best_two_digit()
    assert doc["results"]["report"]["dimension"] == pytest.approx(d_star, abs=1e-8)
    assert doc["results"]["converged"] is True
    assert doc["results"]["ratio_audit"]["violations"] == 0


def test_optimize_tail_artifacts(tmp_path):
    out = tmp_path / "opt64"
    assert run_cli(["optimize", "--n", "64", "--tol", "1e-8",
                    "--out-dir", str(out)]) == 0
    doc = load(out / "optimize_report.json")
    fit = doc["results"]["tail_fit"]
    assert fit is not None and fit["slope"] < -1.5
    tsv = (out / "optimize_tail.tsv").read_text().splitlines()
    assert tsv[0] == "log_k\tlog_p_k\tfit"
    assert len(tsv) == 65
    assert (out / "optimize_tail.png").exists()
    assert (out / "optimize_convergence.png").exists()


def test_sweep_increasing(tmp_path):
    out = tmp_path / "sweep"
    code = run_cli(["sweep", "--n-list", "2,4,8", "--tol", "1e-7",
                    "--out-dir", str(out)])
    assert code == 0
    doc = load(out / "sweep_report.json")
    reports.validate_report(doc)
    ds = [e["dimension"] for e in doc["results"]["per_n"]]
    assert ds == sorted(ds) and len(set(ds)) == 3
    assert all(0.5 < d < 1 - 5e-5 for d in ds)
    assert (out / "sweep_dimensions.png").exists()


def test_diagnose(tmp_path):
    out = tmp_path / "diag"
    code = run_cli(["diagnose", "--weights", "0.5,0.5", "--out-dir", str(out)])
    assert code == 0
    doc = load(out / "diagnose_report.json")
    reports.validate_report(doc)
    res = doc["results"]
    assert res["stochasticity"]["max_deviation"] < 1e-12
    assert res["contraction"]["worst_sup"] <= 0.25 + res["contraction"]["slack"]
    assert res["correlation"]["final_certificate"] < 1e-6
    assert res["correlation"]["indicator_certificate_max"] == 0.0
    assert res["pressure"]["d1_gap"] < 1e-6
    assert res["pressure"]["d2"] >= 0
    assert (out / "diagnose_diagnostics.png").exists()


def test_determinism(tmp_path):
    out = tmp_path / "same"
    args = ["diagnose", "--weights", "0.4,0.6", "--seed", "5", "--out-dir", str(out)]
    assert run_cli(args) == 0
    first = (out / "diagnose_report.json").read_bytes()
    assert run_cli(args) == 0
    second = (out / "diagnose_report.json").read_bytes()
    assert first == second


def test_config_file_and_override(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("n = 2\ntol = 1e-6\nformat = json\n# comment\nout-dir = IGNORED\n")
    out = tmp_path / "cfged"
    code = run_cli(["optimize", "--config", str(cfgfile), "--out-dir", str(out)])
    assert code == 0
    doc = load(out / "optimize_report.json")
    assert doc["config"]["n"] == 2
    assert doc["config"]["tol"] == 1e-6
    assert doc["config"]["out_dir"] == str(out)  # flag overrides config file


def test_weights_from_file(tmp_path):
    wfile = tmp_path / "w.txt"
    wfile.write_text("0.25, 0.25 0.5\n")
    out = tmp_path / "wf"
    assert run_cli(["evaluate", "--weights", f"@{wfile}", "--out-dir", str(out)]) == 0
    doc = load(out / "evaluate_report.json")
    assert doc["results"]["weights"] == [0.25, 0.25, 0.5]


def test_config_errors(tmp_path):
    out = str(tmp_path / "x")
    assert run_cli(["optimize", "--out-dir", out]) == cli.EXIT_CONFIG          # missing --n
    assert run_cli(["optimize", "--n", "1", "--out-dir", out]) == cli.EXIT_CONFIG
    assert run_cli(["evaluate", "--weights", "0.7,0.7", "--out-dir", out]) == cli.EXIT_CONFIG
    assert run_cli(["evaluate", "--weights", "oops", "--out-dir", out]) == cli.EXIT_CONFIG
    assert run_cli(["sweep", "--n-list", "8,4", "--out-dir", out]) == cli.EXIT_CONFIG
    assert run_cli(["optimize", "--n", "2", "--tol", "-1", "--out-dir", out]) == cli.EXIT_CONFIG
    badcfg = tmp_path / "bad.cfg"
    badcfg.write_text("nonsense_key = 3\n")
    assert run_cli(["optimize", "--config", str(badcfg), "--out-dir", out]) == cli.EXIT_CONFIG


def test_non_convergence_exit_code(tmp_path):
    out = tmp_path / "nc"
    code = run_cli(["optimize", "--n", "8", "--tol", "1e-14", "--max-iter", "2",
                    "--out-dir", str(out)])
    assert code == cli.EXIT_NONCONVERGED
    doc = load(out / "optimize_report.json")  # partial artifacts still written
    assert doc["results"]["converged"] is False
    meta = load(out / "optimize_meta.json")
    assert meta["exit_code"] == cli.EXIT_NONCONVERGED


def test_console_entry_point():
    # installed script dispatches to cli.main
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "dimmax.cli", "evaluate",
                           "--weights", "1.0", "--format", "json",
                           "--out-dir", "/tmp/dimmax-entry-test"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "evaluate_report.json" in proc.stdout
