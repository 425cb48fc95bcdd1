import csv
import subprocess
import sys

import pytest

from fdnoma.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VALIDATION,
    cmd_validate,
    main,
    parse_power_grid,
)

GOOD_CONFIG = """\
m_b = 4
m_r = 4
m_t = 4
a1 = 0.25
a2 = 0.75
rho_s = 20
rho_r = 20
var_si = 0.3
k1 = 0.01
rate1 = 0.5
rate2 = 0.5
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "system.cfg"
    path.write_text(GOOD_CONFIG)
    return str(path)


class TestPowerGrid:
    def test_inclusive_range(self):
        assert parse_power_grid("0:50:5") == tuple(float(x) for x in range(0, 55, 5))
        assert len(parse_power_grid("0:50:5")) == 11

    def test_single_point_range(self):
        assert parse_power_grid("10:10:5") == (10.0,)

    def test_comma_list(self):
        assert parse_power_grid("0,7.5,30") == (0.0, 7.5, 30.0)

    @pytest.mark.parametrize("bad", ["0:50", "a:b:c", "0:50:-5", "50:0:5", "x,y"])
    def test_bad_grids_are_usage_errors(self, bad, config_path, tmp_path):
        code = main(
            ["sweep", "--config", config_path, "--power", bad, "--output", str(tmp_path / "o.csv")]
        )
        assert code == EXIT_USAGE


class TestSweep:
    def test_analytic_grid_row_count(self, config_path, tmp_path):
        out = tmp_path / "analytic.csv"
        code = main(
            [
                "sweep",
                "--config",
                config_path,
                "--mode",
                "analytic",
                "--schemes",
                "max_u1_analytic",
                "--power",
                "0:50:5",
                "--output",
                str(out),
            ]
        )
        assert code == EXIT_OK
        with open(out, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 11
        assert all(row["kind"] == "analytic" for row in rows)
        assert all(row["scheme"] == "max_u1_analytic" for row in rows)

    def test_mc_sweep_and_determinism(self, config_path, tmp_path):
        args = [
            "sweep",
            "--config",
            config_path,
            "--mode",
            "mc",
            "--schemes",
            "max_u1,random",
            "--power",
            "0:10:10",
            "--trials",
            "2000",
            "--seed",
            "7",
        ]
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--output", str(out_a)]) == EXIT_OK
        assert main(args + ["--output", str(out_b)]) == EXIT_OK
        assert out_a.read_bytes() == out_b.read_bytes()
        with open(out_a, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 4  # 2 points x 2 schemes
        assert {row["scheme"] for row in rows} == {"max_u1", "random"}

    def test_both_mode_pairs_rows_and_reports_rel_diff(self, config_path, tmp_path, capsys):
        out = tmp_path / "both.csv"
        code = main(
            [
                "sweep",
                "--config",
                config_path,
                "--mode",
                "both",
                "--schemes",
                "max_u2_decoupled",
                "--power",
                "20:20:5",
                "--trials",
                "100000",
                "--output",
                str(out),
            ]
        )
        assert code == EXIT_OK
        captured = capsys.readouterr().out
        assert "rel_diff" in captured
        with open(out, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert [row["kind"] for row in rows] == ["monte_carlo", "analytic"]
        for column in ("rate_u1", "rate_u2"):
            mc, an = (float(row[column]) for row in rows)
            assert abs(mc - an) / an < 0.01, column

    def test_metrics_restriction(self, config_path, tmp_path):
        out = tmp_path / "rates_only.csv"
        code = main(
            [
                "sweep",
                "--config",
                config_path,
                "--metrics",
                "rates",
                "--power",
                "10:10:1",
                "--schemes",
                "max_u1",
                "--trials",
                "1000",
                "--output",
                str(out),
            ]
        )
        assert code == EXIT_OK
        with open(out, newline="") as handle:
            row = next(csv.DictReader(handle))
        assert row["outage_u1"] == "nan"
        assert float(row["rate_u1"]) > 0

    def test_missing_config(self, tmp_path):
        code = main(["sweep", "--config", str(tmp_path / "nope.cfg"), "--output", str(tmp_path / "o.csv")])
        assert code == EXIT_CONFIG

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("a1 = 0.5\na2 = 0.5\n")
        code = main(["sweep", "--config", str(path), "--output", str(tmp_path / "o.csv")])
        assert code == EXIT_CONFIG

    def test_unknown_scheme_is_usage_error(self, config_path, tmp_path):
        code = main(
            [
                "sweep",
                "--config",
                config_path,
                "--schemes",
                "psychic",
                "--output",
                str(tmp_path / "o.csv"),
            ]
        )
        assert code == EXIT_USAGE

    def test_analytic_mode_rejects_schemes_without_closed_forms(self, config_path, tmp_path):
        code = main(
            [
                "sweep",
                "--config",
                config_path,
                "--mode",
                "analytic",
                "--schemes",
                "optimum_sumrate",
                "--output",
                str(tmp_path / "o.csv"),
            ]
        )
        assert code == EXIT_USAGE

    def test_non_converged_analytic_row_reported_and_run_continues(
        self, config_path, tmp_path, capsys, monkeypatch
    ):
        from fdnoma import analytic

        def explode(params, rel_tol=1e-8, abs_tol=1e-9):
            raise analytic.NonConvergedError("forced for test")

        monkeypatch.setattr(analytic, "rate_u2_max_u2", explode)
        out = tmp_path / "partial.csv"
        code = main(
            [
                "sweep",
                "--config",
                config_path,
                "--mode",
                "analytic",
                "--power",
                "10,20",
                "--output",
                str(out),
            ]
        )
        assert code == EXIT_OK
        assert "NON_CONVERGED" in capsys.readouterr().out
        with open(out, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 4  # the failing scheme still gets a (nan) row per point
        broken = [row for row in rows if row["scheme"] == "max_u2_decoupled"]
        assert all(row["rate_u2"] == "nan" for row in broken)
        intact = [row for row in rows if row["scheme"] == "max_u1_analytic"]
        assert all(float(row["rate_u2"]) > 0 for row in intact)

    def test_unknown_metric_is_usage_error(self, config_path, tmp_path):
        code = main(
            [
                "sweep",
                "--config",
                config_path,
                "--metrics",
                "latency",
                "--output",
                str(tmp_path / "o.csv"),
            ]
        )
        assert code == EXIT_USAGE


class TestValidate:
    def test_all_pass(self, config_path, capsys):
        code = main(["validate", "--config", config_path, "--trials", "60000", "--seed", "3"])
        captured = capsys.readouterr().out
        assert code == EXIT_OK
        assert "FAIL" not in captured
        assert captured.count("PASS") >= 5

    def test_injected_failure(self, config_path, capsys):
        class Args:
            config = config_path
            trials = 10
            seed = 0

        checks = (("always_wrong", lambda params, trials, seed: (False, "injected")),)
        assert cmd_validate(Args(), checks=checks) == EXIT_VALIDATION
        assert "FAIL" in capsys.readouterr().out

    def test_missing_config(self, tmp_path):
        code = main(["validate", "--config", str(tmp_path / "absent.cfg")])
        assert code == EXIT_CONFIG


def test_usage_error_without_subcommand():
    assert main([]) == EXIT_USAGE


def test_module_entry_point(config_path, tmp_path):
    out = tmp_path / "cli.csv"
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "fdnoma.cli",
            "sweep",
            "--config",
            config_path,
            "--mode",
            "analytic",
            "--power",
            "10:20:10",
            "--output",
            str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
    assert "wrote 4 rows" in proc.stdout  # 2 points x 2 default analytic schemes
