"""End-to-end command-line behavior: artifacts, exit codes, config merging."""

import csv
import json

import numpy as np
import pytest

from bernpen import cli


def run(*args):
    return cli.main(list(args))


def write_regression_csv(path, seed=0, n=30, p=5):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:2] = [1.5, -1.0]
    y = X @ beta + 0.3 * rng.standard_normal(n)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["y"] + ["x%d" % (j + 1) for j in range(p)])
        for i in range(n):
            writer.writerow([repr(float(y[i]))] + [repr(float(v)) for v in X[i]])
    return beta


def write_classification_csv(path, seed=0, n=40, p=4):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.array([2.0, -1.5, 0.0, 0.0])
    y = np.where(X @ beta + 0.5 * rng.standard_normal(n) > 0, 1.0, -1.0)
    flips = rng.random(n) < 0.15  # keep the sample non-separable
    y[flips] = -y[flips]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["y"] + ["x%d" % (j + 1) for j in range(p)])
        for i in range(n):
            writer.writerow([repr(float(y[i]))] + [repr(float(v)) for v in X[i]])


class TestSimulate:
    def test_artifacts(self, tmp_path, capsys):
        code = run("simulate", "--scenario", "data1", "--seed", "3",
                   "--n-test", "50", "--out", str(tmp_path))
        assert code == 0
        out = capsys.readouterr().out
        assert "train.csv" in out
        with open(tmp_path / "train.csv", newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["y"] + ["x%d" % (j + 1) for j in range(200)]
        assert len(rows) == 101
        with open(tmp_path / "test.csv", newline="") as handle:
            assert sum(1 for _ in handle) == 51
        meta = json.loads((tmp_path / "meta.json").read_text())
        assert meta["scenario"] == "data1"
        assert meta["seed"] == 3
        assert meta["sigma"] > 0

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir(), b.mkdir()
        assert run("simulate", "--seed", "9", "--n-test", "20", "--out", str(a)) == 0
        assert run("simulate", "--seed", "9", "--n-test", "20", "--out", str(b)) == 0
        assert (a / "train.csv").read_bytes() == (b / "train.csv").read_bytes()
        assert (a / "test.csv").read_bytes() == (b / "test.csv").read_bytes()

    def test_bad_scenario_is_usage_error(self, tmp_path):
        assert run("simulate", "--scenario", "data9", "--out", str(tmp_path)) == 1

    def test_missing_outdir_is_data_error(self, tmp_path):
        assert run("simulate", "--out", str(tmp_path / "nope")) == 2


class TestFitPath:
    def test_artifacts(self, tmp_path):
        train = tmp_path / "train.csv"
        write_regression_csv(train)
        out = tmp_path / "fit"
        out.mkdir()
        code = run("fit-path", "--train", str(train), "--penalty", "lfr",
                   "--n-etas", "6", "--alphas", "2,1,0.5", "--out", str(out))
        assert code == 0
        with open(out / "path.csv", newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["alpha", "eta", "status", "sweeps", "objective", "nnz"]
        assert len(rows) == 1 + 3 * 6
        with open(out / "diagnostics.csv", newline="") as handle:
            drows = list(csv.reader(handle))
        assert drows[0] == ["alpha", "eta", "kkt", "eigen_margin",
                            "eigen_margin_scaled", "strict_dual_feasible"]
        assert all(row[5] in ("true", "false") for row in drows[1:])
        with open(out / "coefs.csv", newline="") as handle:
            crows = list(csv.reader(handle))
        assert crows[0][:3] == ["alpha", "eta", "intercept"]
        summary = json.loads((out / "summary.json").read_text())
        assert summary["family"] == "bernstein"
        assert summary["rho"] == 0.5

    def test_l1_forces_single_alpha(self, tmp_path):
        train = tmp_path / "train.csv"
        write_regression_csv(train)
        out = tmp_path / "fit"
        out.mkdir()
        assert run("fit-path", "--train", str(train), "--penalty", "l1",
                   "--n-etas", "4", "--alphas", "8,4,2", "--out", str(out)) == 0
        with open(out / "path.csv", newline="") as handle:
            rows = list(csv.reader(handle))[1:]
        assert {row[0] for row in rows} == {"1"}
        assert len(rows) == 4

    def test_cv_and_evaluate(self, tmp_path):
        train = tmp_path / "train.csv"
        test = tmp_path / "test.csv"
        write_regression_csv(train, seed=1)
        write_regression_csv(test, seed=2, n=50)
        out = tmp_path / "fit"
        out.mkdir()
        code = run("fit-path", "--train", str(train), "--cv-folds", "3",
                   "--n-etas", "5", "--alphas", "1,0.5",
                   "--evaluate", str(test), "--sigma", "0.3", "--out", str(out))
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert {"alpha", "eta", "nnz"} <= set(summary["cv"])
        assert float(summary["spe"]) > 0.0

    def test_evaluate_needs_sigma_or_meta(self, tmp_path):
        train = tmp_path / "train.csv"
        test = tmp_path / "test.csv"
        write_regression_csv(train)
        write_regression_csv(test, seed=2)
        out = tmp_path / "fit"
        out.mkdir()
        assert run("fit-path", "--train", str(train), "--cv-folds", "3",
                   "--n-etas", "4", "--evaluate", str(test), "--out", str(out)) == 1
        assert run("fit-path", "--train", str(train),
                   "--evaluate", str(test), "--sigma", "1.0", "--out", str(out)) == 1

    def test_sigma_from_meta_sidecar(self, tmp_path):
        sim = tmp_path / "sim"
        sim.mkdir()
        assert run("simulate", "--seed", "5", "--n-test", "40", "--out", str(sim)) == 0
        out = tmp_path / "fit"
        out.mkdir()
        code = run("fit-path", "--train", str(sim / "train.csv"), "--cv-folds", "3",
                   "--n-etas", "4", "--alphas", "1,0.5", "--eta-min-ratio", "0.05",
                   "--evaluate", str(sim / "test.csv"), "--meta", str(sim / "meta.json"),
                   "--out", str(out))
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert float(summary["spe"]) > 0.0

    def test_missing_train_file(self, tmp_path):
        assert run("fit-path", "--train", str(tmp_path / "ghost.csv"),
                   "--out", str(tmp_path)) == 2

    def test_bad_penalty_name(self, tmp_path):
        train = tmp_path / "train.csv"
        write_regression_csv(train)
        assert run("fit-path", "--train", str(train), "--penalty", "scad",
                   "--out", str(tmp_path)) == 1

    def test_deterministic_outputs(self, tmp_path):
        train = tmp_path / "train.csv"
        write_regression_csv(train)
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir(), b.mkdir()
        args = ["fit-path", "--train", str(train), "--n-etas", "5", "--alphas", "1,0.5"]
        assert run(*args, "--out", str(a)) == 0
        assert run(*args, "--out", str(b)) == 0
        assert (a / "path.csv").read_bytes() == (b / "path.csv").read_bytes()
        assert (a / "coefs.csv").read_bytes() == (b / "coefs.csv").read_bytes()


class TestFitClassify:
    def test_logistic_artifacts(self, tmp_path):
        train = tmp_path / "train.csv"
        test = tmp_path / "test.csv"
        write_classification_csv(train, seed=3)
        write_classification_csv(test, seed=4, n=60)
        out = tmp_path / "fit"
        out.mkdir()
        code = run("fit-classify", "--train", str(train), "--loss", "logistic",
                   "--penalty", "lfr", "--eta", "0.1", "--test", str(test),
                   "--out", str(out))
        assert code == 0
        with open(out / "trace.csv", newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["epoch", "objective", "step_norm"]
        assert rows[1][0] == "0" and rows[1][2] == "0"
        objectives = [float(r[1]) for r in rows[1:]]
        assert all(b <= a + 1e-9 for a, b in zip(objectives, objectives[1:]))
        with open(out / "coef.csv", newline="") as handle:
            crows = list(csv.reader(handle))
        assert crows[0] == ["coordinate", "value"]
        assert len(crows) == 5
        summary = json.loads((out / "summary.json").read_text())
        assert summary["converged"] is True
        assert 0.0 <= float(summary["accuracy"]) <= 1.0
        assert float(summary["kkt"]) < 1e-3

    def test_huber_reports_test_loss(self, tmp_path):
        train = tmp_path / "train.csv"
        test = tmp_path / "test.csv"
        write_regression_csv(train, seed=5)
        write_regression_csv(test, seed=6)
        out = tmp_path / "fit"
        out.mkdir()
        code = run("fit-classify", "--train", str(train), "--loss", "huber",
                   "--delta", "1.0", "--lam", "0.2", "--test", str(test),
                   "--out", str(out))
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert float(summary["test_loss"]) > 0.0
        assert "accuracy" not in summary

    def test_needs_lam_or_eta(self, tmp_path):
        train = tmp_path / "train.csv"
        write_classification_csv(train)
        assert run("fit-classify", "--train", str(train), "--out", str(tmp_path)) == 1

    def test_rejects_other_losses(self, tmp_path):
        train = tmp_path / "train.csv"
        write_classification_csv(train)
        assert run("fit-classify", "--train", str(train), "--loss", "squared",
                   "--lam", "0.1", "--out", str(tmp_path)) == 1


class TestEmitCurves:
    def test_default_curves(self, tmp_path):
        code = run("emit-curves", "--s-max", "2", "--s-step", "0.5",
                   "--phi2-vs-mcp", "true", "--out", str(tmp_path))
        assert code == 0
        for name in ("curve_rho_m1.csv", "curve_rho_0.csv",
                     "curve_rho_0p5.csv", "curve_rho_1.csv"):
            with open(tmp_path / name, newline="") as handle:
                rows = list(csv.reader(handle))
            assert rows[0] == ["s", "phi", "dphi"]
            assert len(rows) == 6
            assert float(rows[1][1]) == 0.0
            assert float(rows[1][2]) == 1.0
        with open(tmp_path / "mcp_vs_phi2.csv", newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["s", "mcp", "phi2"]
        # both curves agree on [0, 1] and split beyond the knee
        assert float(rows[2][1]) == pytest.approx(float(rows[2][2]))
        assert float(rows[5][1]) == 0.5
        assert float(rows[5][2]) == 0.0

    def test_bad_grid(self, tmp_path):
        assert run("emit-curves", "--s-step", "0", "--out", str(tmp_path)) == 1


class TestThresholdSweep:
    def test_sweep_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run("threshold-sweep", "--penalty", "log", "--alpha", "2",
                   "--lam", "1", "--z-min", "-3", "--z-max", "3",
                   "--z-step", "0.25", "--out", str(out))
        assert code == 0
        with open(out, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["z", "estimate", "case"]
        assert len(rows) == 26
        estimates = [float(r[1]) for r in rows[1:]]
        assert all(b >= a - 1e-12 for a, b in zip(estimates, estimates[1:]))
        assert {r[2] for r in rows[1:]} == {"II"}  # lam*alpha^2 = 4

    def test_l1_and_mcp_tags(self, tmp_path):
        out = tmp_path / "l1.csv"
        assert run("threshold-sweep", "--penalty", "l1", "--lam", "0.5",
                   "--z-step", "1", "--out", str(out)) == 0
        with open(out, newline="") as handle:
            rows = list(csv.reader(handle))[1:]
        assert {r[2] for r in rows} == {"I"}
        out2 = tmp_path / "mcp.csv"
        assert run("threshold-sweep", "--penalty", "mcp", "--alpha", "0.5",
                   "--lam", "0.5", "--z-step", "1", "--out", str(out2)) == 0
        with open(out2, newline="") as handle:
            rows = list(csv.reader(handle))[1:]
        assert {r[2] for r in rows} == {"I"}  # lam*alpha^2 = 0.125

    def test_eta_route_matches_lam_route(self, tmp_path):
        spec_args = ["--penalty", "lfr", "--alpha", "2", "--z-step", "0.5"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run("threshold-sweep", *spec_args, "--eta", "0.5", "--out", str(a)) == 0
        # P_unit(2) for this family is 1, so eta 0.5 means lam 0.5
        assert run("threshold-sweep", *spec_args, "--lam", "0.5", "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_validation(self, tmp_path):
        out = tmp_path / "x.csv"
        assert run("threshold-sweep", "--lam", "1", "--z-min", "2",
                   "--z-max", "-2", "--out", str(out)) == 1
        assert run("threshold-sweep", "--out", str(out)) == 1


class TestConfigAndDispatch:
    def test_config_file_supplies_defaults_flags_win(self, tmp_path):
        train = tmp_path / "train.csv"
        write_regression_csv(train)
        config = tmp_path / "run.ini"
        config.write_text(
            "[fit-path]\ntrain = %s\npenalty = log\nn-etas = 4\nalphas = 1,0.5\n" % train
        )
        out_a = tmp_path / "a"
        out_a.mkdir()
        assert run("fit-path", "--config", str(config), "--out", str(out_a)) == 0
        summary = json.loads((out_a / "summary.json").read_text())
        assert summary["rho"] == 0.0
        out_b = tmp_path / "b"
        out_b.mkdir()
        assert run("fit-path", "--config", str(config), "--penalty", "kep",
                   "--out", str(out_b)) == 0
        summary = json.loads((out_b / "summary.json").read_text())
        assert summary["rho"] == -1.0

    def test_missing_config_file(self, tmp_path):
        assert run("fit-path", "--config", str(tmp_path / "ghost.ini"),
                   "--out", str(tmp_path)) == 2

    def test_bad_option_value(self, tmp_path):
        train = tmp_path / "train.csv"
        write_regression_csv(train)
        assert run("fit-path", "--train", str(train), "--tol", "abc",
                   "--out", str(tmp_path)) == 1

    def test_no_command_prints_usage(self, capsys):
        assert cli.main([]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_command_is_usage_error(self):
        assert cli.main(["frobnicate"]) == 1

    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as info:
            cli.main(["--help"])
        assert info.value.code == 0

    def test_numerical_errors_map_to_exit_3(self, monkeypatch, capsys):
        from bernpen.errors import NoRootError

        def boom(opts):
            raise NoRootError("no bracket")

        monkeypatch.setitem(cli._COMMANDS, "emit-curves", boom)
        assert cli.main(["emit-curves", "--out", "."]) == 3
        assert "numerical error" in capsys.readouterr().err
