import math
import shlex
import subprocess
import sys
from pathlib import Path

import pytest

from maci.cli import main
from maci.report import read_csv

DATA = Path(__file__).parent / "data"


def run(argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def rerun_from_header(meta):
    # the header's command line, run again verbatim, must rewrite the same bytes
    argv = shlex.split(meta["command"])[1:]
    out = Path(argv[argv.index("--out") + 1])
    before = out.read_bytes()
    out.unlink()
    assert run(argv) == 0
    return out.read_bytes() == before


class TestCurve:
    def test_m1(self, tmp_path, capsys):
        out, svg = tmp_path / "c.csv", tmp_path / "c.svg"
        code = run(["curve", "--m", 1, "--p", 3, "--rho", 0.5, "--alpha", 0.05, "--d", 2,
                    "--gamma-step", 1, "--out", out, "--plot", svg])
        assert code == 0
        meta, cols = read_csv(out)
        assert list(cols) == ["gamma", "cp", "sel"]
        assert len(cols["gamma"]) == 11
        assert cols["cp"].min() >= 0.94
        assert float(meta["c_min"]) >= 0.94
        assert cols["sel"][0] < 1
        for key in ("tool_version", "abs_tol", "m", "p", "rho", "alpha", "d", "c_min", "command"):
            assert key in meta
        text = svg.read_text()
        assert text.startswith("<svg") and text.count("<polyline") == 2
        assert rerun_from_header(meta)

    def test_sel_exceeds_one(self, tmp_path):
        out = tmp_path / "c.csv"
        assert run(["curve", "--m", 10, "--p", 3, "--rho", 0.9, "--gamma-step", 0.5, "--only", "sel",
                    "--out", out]) == 0
        _, cols = read_csv(out)
        assert list(cols) == ["gamma", "sel"]
        assert cols["sel"].max() > 1

    @pytest.mark.parametrize("flags", [
        ["--rho", 1.5], ["--rho", "abc"], ["--rho", 0.5, "--alpha", 1.2], ["--rho", 0.5, "--m", 0],
        ["--rho", 0.5, "--gamma-step", 20], ["--rho", 0.5, "--d", -1],
    ])
    def test_usage_errors(self, tmp_path, flags):
        args = {"--m": 1, "--p": 3}
        for i in range(0, len(flags), 2):
            args[flags[i]] = flags[i + 1]
        argv = ["curve", "--out", tmp_path / "x.csv"] + [x for kv in args.items() for x in kv]
        assert run(argv) == 2
        assert not (tmp_path / "x.csv").exists()

    def test_quadrature_failure_exit_code(self, tmp_path, monkeypatch):
        from maci import cli
        from maci.errors import QuadratureError

        def boom(*a, **k):
            raise QuadratureError("budget exhausted", estimate=0.5, error=1e-3)

        monkeypatch.setattr(cli, "sweep_curve", boom)
        assert run(["curve", "--m", 1, "--p", 3, "--rho", 0.5, "--out", tmp_path / "x.csv"]) == 3


class TestAsymptotic:
    def test_null(self, tmp_path):
        out = tmp_path / "a.csv"
        assert run(["asymptotic", "--rho-bar", 0, "--alpha", 0.05, "--out", out]) == 0
        meta, cols = read_csv(out)
        assert len(cols["gamma"]) == 101
        assert max(abs(v - 0.95) for v in cols["cp"]) <= 1e-7
        assert max(abs(v - 1.0) for v in cols["sel"]) <= 1e-7
        assert float(meta["c_min_star"]) == pytest.approx(0.95, abs=1e-7)

    def test_headline(self, tmp_path):
        out, svg = tmp_path / "a.csv", tmp_path / "a.svg"
        assert run(["asymptotic", "--rho-bar", 0.9, "--out", out, "--plot", svg]) == 0
        meta, cols = read_csv(out)
        assert cols["cp"].min() == pytest.approx(0.83, abs=0.01)
        assert float(meta["c_min_star"]) == pytest.approx(0.83, abs=0.01)
        assert rerun_from_header(meta)
        assert svg.exists()

    def test_cap(self, tmp_path):
        assert run(["asymptotic", "--rho-bar", 0.99999999, "--out", tmp_path / "a.csv"]) == 2


class TestHcCompare:
    def test_output(self, tmp_path):
        out, svg = tmp_path / "h.csv", tmp_path / "h.svg"
        assert run(["hc-compare", "--out", out, "--plot", svg]) == 0
        meta, cols = read_csv(out)
        assert list(cols) == ["gamma", "cp_hc1", "cp_hc2"]
        rb = [float(v) for v in meta["rho_bar"].split(",")]
        assert rb == pytest.approx([2 / math.sqrt(13), 1 / math.sqrt(2)], abs=1e-9)
        assert meta["alpha"] == "0.1"
        assert cols["cp_hc2"].min() < cols["cp_hc1"].min()
        assert svg.read_text().count("<polyline") == 2

    def test_tail(self, tmp_path):
        out = tmp_path / "h.csv"
        assert run(["hc-compare", "--gamma-max", 20, "--gamma-step", 20, "--out", out]) == 0
        _, cols = read_csv(out)
        assert cols["cp_hc1"][-1] >= 0.9 - 0.002 and cols["cp_hc2"][-1] >= 0.9 - 0.002


class TestInterval:
    def test_golden(self, capsys):
        assert run(["interval", "--data", DATA / "reference_problem.txt"]) == 0
        report = capsys.readouterr().out
        gold = {}
        for line in (DATA / "reference_interval.txt").read_text().splitlines():
            k, _, v = line.partition(" = ")
            gold[k] = float(v)
        got = {}
        for line in report.splitlines():
            if line.count("=") == 1 and not line.startswith("interval"):
                k, _, v = line.partition(" = ")
                got[k] = float(v)
        for key in ("theta_hat", "theta_hat_1", "gamma_hat", "w1_value", "sigma_hat",
                    "theta_tilde", "se", "lower", "upper"):
            assert got[key] == pytest.approx(gold[key], rel=1e-9), key
        assert "interval = [0.7883672388, 1.601646523]" in report

    def test_csv(self, tmp_path, capsys):
        out = tmp_path / "i.csv"
        assert run(["interval", "--data", DATA / "reference_problem.txt", "--csv", out]) == 0
        _, cols = read_csv(out)
        assert cols["upper"][0] == pytest.approx(1.601646523, abs=1e-9)

    def test_zero_tau_hat_centre(self, tmp_path, capsys):
        # y exactly on a model with c'beta = 0 plus noise orthogonal to X
        prob = tmp_path / "p.txt"
        prob.write_text("4 2\n1 0\n0 1\n1 1\n1 -1\n1 2 3 -2\n1 0\n0 1\n0\n")
        from maci.testbed import fit, read_problem
        beta, _ = fit(read_problem(prob))
        prob.write_text(f"4 2\n1 0\n0 1\n1 1\n1 -1\n1 2 3 -2\n1 0\n0 1\n{float(beta[1])!r}\n")
        assert run(["interval", "--data", prob]) == 0
        lines = dict(line.split(" = ", 1) for line in capsys.readouterr().out.splitlines()
                     if line.count(" = ") == 1)
        assert float(lines["theta_tilde"]) == pytest.approx(float(lines["theta_hat"]), abs=1e-9)

    def test_truncated(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("3 2\n1 0\n1 1\n1 2\n1 2 3\n1 0\n")
        assert run(["interval", "--data", bad]) == 2
        err = capsys.readouterr().err
        assert "line 6" in err and "section 'c'" in err

    def test_missing_file(self, tmp_path):
        assert run(["interval", "--data", tmp_path / "nope.txt"]) == 2

    def test_perfect_fit(self, tmp_path, capsys):
        f = tmp_path / "p.txt"
        f.write_text("4 2\n1 0\n0 1\n1 1\n1 -1\n1 2 3 -1\n1 0\n0 1\n0\n")
        assert run(["interval", "--data", f]) == 3
        assert "numerical failure" in capsys.readouterr().err


class TestMcVerify:
    def test_defaults_pass_and_deterministic(self, capsys):
        assert run(["mc-verify"]) == 0
        first = capsys.readouterr().out
        assert first.rstrip().endswith("PASS")
        assert "replicates = 1000000" in first
        assert run(["mc-verify"]) == 0
        assert capsys.readouterr().out == first

    def test_full_regression(self, capsys):
        assert run(["mc-verify", "--rho", 0.5, "--gamma", 1, "--replicates", 200000,
                    "--full-regression", "--full-replicates", 50000]) == 0
        assert "cp_full_regression" in capsys.readouterr().out

    def test_zero_replicates(self):
        assert run(["mc-verify", "--replicates", 0]) == 2

    def test_failure_exit_code(self, capsys, monkeypatch):
        from maci import cli
        from maci.montecarlo import McEstimate

        monkeypatch.setattr(cli, "mc_coverage", lambda *a, **k: McEstimate(0.5, 1e-3, 10))
        assert run(["mc-verify", "--m", 1, "--rho", 0.2, "--replicates", 1000]) == 4
        out = capsys.readouterr().out
        assert "cp: " in out and out.rstrip().endswith("FAIL")


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "maci.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("maci ")
