import csv
import json

import numpy as np
import pytest

from ngmres import StoppingCriterion
from ngmres.cli import (
    RunSpec,
    SphereRule,
    UsageError,
    compare,
    main,
    run,
    sample_x0,
    summary_path,
)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def bench_spec(**kw):
    base = dict(
        problem="quadratic2d",
        params={"c1": 4 / 5, "c2": 2 / 3},
        method="ngmres",
        m=0,
        x0=np.array([-0.25, 0.25]),
        stop=StoppingCriterion(tol=1e-14, max_iters=300),
    )
    base.update(kw)
    return RunSpec(**base)


class TestSampleX0:
    def test_radius_exact(self):
        rule = SphereRule(center=np.zeros(2), radius=0.4)
        for trial in (0, 1, 99):
            x = sample_x0(rule, 42, trial)
            assert np.linalg.norm(x) == pytest.approx(0.4, abs=1e-15)

    def test_offset_center_high_dim(self):
        center = np.full(100, np.pi / 4)
        rule = SphereRule(center=center, radius=0.1)
        x = sample_x0(rule, 0, 3)
        assert np.linalg.norm(x - center) == pytest.approx(0.1, abs=1e-15)

    def test_deterministic_per_trial(self):
        rule = SphereRule(center=np.zeros(3), radius=1.0)
        a = sample_x0(rule, 7, 5)
        b = sample_x0(rule, 7, 5)
        np.testing.assert_array_equal(a, b)
        c = sample_x0(rule, 7, 6)
        assert not np.array_equal(a, c)
        d = sample_x0(rule, 8, 5)
        assert not np.array_equal(a, d)

    def test_radius_validated(self):
        with pytest.raises(UsageError):
            SphereRule(center=np.zeros(2), radius=0.0)


class TestRunSpec:
    def test_needs_exactly_one_x0_source(self):
        with pytest.raises(UsageError):
            bench_spec(x0=None)
        with pytest.raises(UsageError):
            bench_spec(sphere=SphereRule(center=np.zeros(2), radius=0.1))

    def test_method_validated(self):
        with pytest.raises(UsageError):
            bench_spec(method="newton")

    def test_trials_validated(self):
        with pytest.raises(UsageError):
            bench_spec(trials=0)


class TestRun:
    def test_solve_schema_and_summary(self, tmp_path):
        out = tmp_path / "hist.csv"
        spec = bench_spec(out=str(out))
        assert run(spec, trial_column=False) == 0
        header, rows = read_csv(out)
        assert header == ["k", "res_norm", "q_factor", "root_factor", "sum_abs_beta", "ls_ratio"]
        assert rows[0][0] == "0"
        assert rows[0][2] == "" and rows[0][3] == ""  # k = 0 factors undefined
        assert rows[0][4] != ""  # step coefficients exist at k = 0
        assert rows[-1][4] == "" and rows[-1][5] == ""  # terminal record has no step
        sum_header, sum_rows = read_csv(summary_path(out))
        assert sum_header[:4] == ["trial", "status", "iterations", "g_evals"]
        assert len(sum_rows) == 1
        assert sum_rows[0][1] == "converged"
        assert int(sum_rows[0][2]) == len(rows) - 1

    def test_fp_rows_leave_ls_fields_blank(self, tmp_path):
        out = tmp_path / "fp.csv"
        assert run(bench_spec(method="fp", out=str(out)), trial_column=False) == 0
        _, rows = read_csv(out)
        assert all(row[4] == "" and row[5] == "" for row in rows)

    def test_sweep_has_trial_column(self, tmp_path):
        out = tmp_path / "sweep.csv"
        spec = bench_spec(
            x0=None,
            sphere=SphereRule(center=np.zeros(2), radius=0.4),
            trials=5,
            seed=42,
            out=str(out),
        )
        assert run(spec, trial_column=True) == 0
        header, rows = read_csv(out)
        assert header[0] == "trial"
        assert {row[0] for row in rows} == {"0", "1", "2", "3", "4"}
        _, sum_rows = read_csv(summary_path(out))
        assert len(sum_rows) == 5
        assert all(row[1] == "converged" for row in sum_rows)

    def test_byte_identical_reruns(self, tmp_path):
        spec_a = bench_spec(
            x0=None,
            sphere=SphereRule(center=np.zeros(2), radius=0.4),
            trials=4,
            seed=9,
            out=str(tmp_path / "a.csv"),
        )
        spec_b = bench_spec(
            x0=None,
            sphere=SphereRule(center=np.zeros(2), radius=0.4),
            trials=4,
            seed=9,
            out=str(tmp_path / "b.csv"),
        )
        assert run(spec_a, trial_column=True) == 0
        assert run(spec_b, trial_column=True) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_divergence_is_not_an_error(self, tmp_path):
        out = tmp_path / "div.csv"
        spec = bench_spec(
            params={"c1": 1.0, "c2": 2.0},
            method="fp",
            out=str(out),
        )
        assert run(spec, trial_column=False) == 0
        _, sum_rows = read_csv(summary_path(out))
        assert sum_rows[0][1] in ("diverged", "max_iters")

    def test_requires_out(self):
        with pytest.raises(UsageError):
            run(bench_spec(out=None))


class TestCompare:
    def test_borderline_two_columns(self, tmp_path):
        out = tmp_path / "cmp.csv"
        specs = [
            bench_spec(params={"c1": 1.0, "c2": 1.0}, method="fp"),
            bench_spec(params={"c1": 1.0, "c2": 1.0}, method="ngmres", m=0),
        ]
        assert compare(specs, str(out)) == 0
        header, rows = read_csv(out)
        assert header == ["k", "res_norm_fp", "res_norm_ngmres0"]
        # the accelerated run terminates first: its column is padded
        assert rows[-1][1] != "" and rows[-1][2] == ""
        ng_len = sum(1 for row in rows if row[2] != "")
        fp_len = sum(1 for row in rows if row[1] != "")
        assert ng_len < fp_len

    def test_noncontractive_windows(self, tmp_path):
        out = tmp_path / "cmp3.csv"
        specs = [
            bench_spec(params={"c1": 1.0, "c2": 2.0}, method="ngmres", m=0),
            bench_spec(params={"c1": 1.0, "c2": 2.0}, method="ngmres", m=1),
        ]
        assert compare(specs, str(out)) == 0
        _, rows = read_csv(out)
        ng0 = [float(r[1]) for r in rows if r[1] != ""]
        ng1 = [float(r[2]) for r in rows if r[2] != ""]
        assert ng1[-1] <= 1e-14
        assert ng0[-1] > 1e-14

    def test_single_spec(self, tmp_path):
        out = tmp_path / "single.csv"
        assert compare([bench_spec()], str(out)) == 0
        header, rows = read_csv(out)
        assert header == ["k", "res_norm_ngmres0"]
        assert all(row[1] != "" for row in rows)

    def test_rejects_mismatched_problems(self, tmp_path):
        specs = [bench_spec(), bench_spec(params={"c1": 1.0, "c2": 1.0})]
        with pytest.raises(UsageError):
            compare(specs, str(tmp_path / "x.csv"))

    def test_rejects_mismatched_x0(self, tmp_path):
        specs = [bench_spec(), bench_spec(x0=np.array([0.1, 0.1]))]
        with pytest.raises(UsageError):
            compare(specs, str(tmp_path / "x.csv"))

    def test_rejects_duplicate_labels(self, tmp_path):
        specs = [bench_spec(), bench_spec()]
        with pytest.raises(UsageError):
            compare(specs, str(tmp_path / "x.csv"))


class TestMainCli:
    def test_solve_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "h.csv"
        code = main(
            [
                "solve",
                "--problem", "quadratic2d",
                "--c1", "0.8",
                "--c2", "0.6666666666666666",
                "--method", "ngmres",
                "--m", "0",
                "--x0=-0.25,0.25",
                "--out", str(out),
            ]
        )
        assert code == 0
        header, rows = read_csv(out)
        assert header[0] == "k"
        assert len(rows) >= 2

    def test_defaults_applied(self, tmp_path):
        out = tmp_path / "h.csv"
        # default problem params give the contractive case; default method ngmres m=0
        code = main(["solve", "--problem", "quadratic2d", "--x0=-0.25,0.25", "--out", str(out)])
        assert code == 0
        _, sum_rows = read_csv(summary_path(out))
        assert sum_rows[0][1] == "converged"

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "problem": "quadratic2d",
                    "c1": 1.0,
                    "c2": 1.0,
                    "method": "fp",
                    "x0": [-0.25, 0.25],
                    "out": str(tmp_path / "from_config.csv"),
                }
            )
        )
        out = tmp_path / "override.csv"
        code = main(["solve", "--config", str(cfg), "--method", "ngmres", "--out", str(out)])
        assert code == 0
        assert out.exists() and not (tmp_path / "from_config.csv").exists()
        _, rows = read_csv(out)
        # ngmres rows carry coefficients, so the override took effect
        assert rows[0][4] != ""

    def test_sweep_cli(self, tmp_path):
        out = tmp_path / "sw.csv"
        code = main(
            [
                "sweep",
                "--problem", "quadratic2d",
                "--radius", "0.4",
                "--trials", "3",
                "--seed", "42",
                "--out", str(out),
            ]
        )
        assert code == 0
        header, _ = read_csv(out)
        assert header[0] == "trial"

    def test_compare_cli(self, tmp_path):
        out = tmp_path / "cmp.csv"
        code = main(
            [
                "compare",
                "--problem", "quadratic2d",
                "--c1", "1", "--c2", "1",
                "--methods", "fp,ngmres:0",
                "--x0=-0.25,0.25",
                "--out", str(out),
            ]
        )
        assert code == 0
        header, _ = read_csv(out)
        assert header == ["k", "res_norm_fp", "res_norm_ngmres0"]

    def test_diagnose_cli(self, tmp_path):
        out = tmp_path / "diag.json"
        code = main(
            [
                "diagnose",
                "--problem", "quadratic2d",
                "--x0=-0.25,0.25",
                "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["status"] == "converged"
        assert payload["rho"] == pytest.approx(0.4, abs=1e-10)
        assert payload["eta_bound"] == pytest.approx(14 / 15, rel=1e-12)
        assert payload["q_bound_satisfied"] is True
        assert payload["max_ls_ratio"] <= 1.0 + 1e-12

    def test_usage_errors_exit_1(self, tmp_path, capsys):
        assert main(["solve", "--problem", "nosuch", "--x0=1", "--out", "x.csv"]) == 1
        assert main(["solve", "--problem", "quadratic2d", "--x0=-0.25,0.25"]) == 1
        assert main(["solve", "--problem", "quadratic2d", "--out", "x.csv"]) == 1
        assert main(["sweep", "--problem", "quadratic2d", "--out", "x.csv"]) == 1
        assert main(["nosuchcommand"]) == 1
        capsys.readouterr()

    def test_unwritable_output_exits_1(self, tmp_path, capsys):
        out = tmp_path / "missing_dir" / "h.csv"
        code = main(["solve", "--problem", "quadratic2d", "--x0=-0.25,0.25", "--out", str(out)])
        assert code == 1
        capsys.readouterr()

    def test_cli_byte_determinism(self, tmp_path):
        args = [
            "sweep",
            "--problem", "quadratic2d",
            "--radius", "0.4",
            "--trials", "2",
            "--seed", "3",
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
