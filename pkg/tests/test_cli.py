"""
Tests for the command-line entry point
"""

import pytest

from app import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main

SMALL = ["--set", "horizon=20", "--set", "trials=3"]


class TestRunAndCompare:

    def test_run_writes_csv(self, tmp_path):
        out = tmp_path / "run.csv"
        code = main(["--quiet", "run", "--config", "figure1-50pct", "--out", str(out)] + SMALL)
        assert code == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "period,policy,mean_cum_regret,stderr,trials"
        # checkpoints 10 and 20 for each of ts, ucb, oco
        assert len(lines) == 1 + 6

    def test_single_policy(self, tmp_path):
        out = tmp_path / "run.csv"
        code = main(["--quiet", "run", "--config", "figure1-50pct", "--out", str(out), "--policy", "oracle"] + SMALL)
        assert code == EXIT_OK
        rows = out.read_text(encoding="utf-8").splitlines()[1:]
        assert rows == ["10,oracle,0.000000,0.000000,3", "20,oracle,0.000000,0.000000,3"]

    def test_byte_identical_reruns(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (first, second):
            main(["--quiet", "compare", "--config", "figure2-90pct", "--out", str(out)] + SMALL)
        assert first.read_bytes() == second.read_bytes()

    def test_compare_with_pdf_and_realized(self, tmp_path, capsys):
        out, pdf, realized = tmp_path / "c.csv", tmp_path / "c.pdf", tmp_path / "r.csv"
        code = main(["compare", "--config", "figure2-50pct", "--out", str(out), "--pdf", str(pdf),
                     "--realized-out", str(realized)] + SMALL)
        assert code == EXIT_OK
        assert pdf.read_bytes().startswith(b"%PDF")
        assert realized.exists()
        printed = capsys.readouterr().out
        assert "Censored Newsvendor Lab" in printed
        assert "myopic: mean cumulative regret" in printed


class TestOtherCommands:

    def test_bounds(self, tmp_path):
        out = tmp_path / "bounds.txt"
        code = main(["--quiet", "bounds", "--config", "figure1-50pct", "--out", str(out), "--set", "horizon=30"])
        assert code == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[4] == "t,epsilon_t"
        assert len(lines) == 35

    def test_bounds_with_coverage(self, tmp_path, capsys):
        out = tmp_path / "bounds.txt"
        code = main(["--quiet", "bounds", "--config", "figure1-50pct", "--out", str(out),
                     "--set", "horizon=30", "--coverage-trials", "3"])
        assert code == EXIT_OK
        assert "martingale_violation=" in capsys.readouterr().out

    def test_bounds_need_weibull(self, tmp_path):
        code = main(["--quiet", "bounds", "--config", "figure3-normal", "--out", str(tmp_path / "b.txt")])
        assert code == EXIT_CONFIG

    def test_km(self, tmp_path, capsys):
        source = tmp_path / "sales.csv"
        source.write_text("sale,censored\n1,0\n2,1\n3,0\n", encoding="utf-8")
        out = tmp_path / "km.csv"
        code = main(["--quiet", "km", "--in", str(source), "--out", str(out), "--k", "1"])
        assert code == EXIT_OK
        assert out.read_text(encoding="utf-8").splitlines()[0] == "x,survival"
        printed = capsys.readouterr().out
        assert "theta_hat=" in printed
        assert "weighted_band_distance=" in printed


class TestExitCodes:

    def test_unknown_key(self, tmp_path, capsys):
        code = main(["--quiet", "run", "--config", "figure1-50pct", "--out", str(tmp_path / "x.csv"),
                     "--set", "colour=blue"])
        assert code == EXIT_CONFIG
        assert "Error: colour: unknown key" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        code = main(["--quiet", "run", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_CONFIG

    def test_unknown_policy(self, tmp_path):
        code = main(["--quiet", "run", "--config", "figure1-50pct", "--out", str(tmp_path / "x.csv"),
                     "--policy", "greedy"] + SMALL)
        assert code == EXIT_CONFIG

    def test_missing_km_input(self, tmp_path):
        code = main(["--quiet", "km", "--in", str(tmp_path / "none.csv"), "--out", str(tmp_path / "km.csv")])
        assert code == EXIT_CONFIG

    def test_runtime_failure(self, tmp_path):
        code = main(["--quiet", "run", "--config", "figure1-50pct", "--out", str(tmp_path / "x.csv"),
                     "--policy", "fixed:-1"] + SMALL)
        assert code == EXIT_RUNTIME

    def test_unwritable_output(self, tmp_path):
        code = main(["--quiet", "run", "--config", "figure1-50pct", "--out", str(tmp_path / "no" / "x.csv"),
                     "--policy", "oracle"] + SMALL)
        assert code == EXIT_RUNTIME

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2
