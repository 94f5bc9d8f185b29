import json

import numpy as np
import pytest

from mixdetect.cli import main, read_sample_file


def write_samples(tmp_path, x, y):
    xf = tmp_path / "x.txt"
    yf = tmp_path / "y.txt"
    xf.write_text("\n".join(str(v) for v in x) + "\n")
    yf.write_text("\n".join(str(v) for v in y) + "\n")
    return str(xf), str(yf)


class TestReadSampleFile:
    def test_comments_and_blanks(self, tmp_path):
        f = tmp_path / "s.txt"
        f.write_text("# header\n1.5\n\n2.5  # trailing\n")
        np.testing.assert_array_equal(read_sample_file(f), [1.5, 2.5])

    def test_bad_value(self, tmp_path):
        f = tmp_path / "s.txt"
        f.write_text("1.0\nnot-a-number\n")
        with pytest.raises(Exception):
            read_sample_file(f)

    def test_missing_file(self, tmp_path):
        with pytest.raises(Exception):
            read_sample_file(tmp_path / "nope.txt")


class TestCmdTest:
    def test_tailrun_exact(self, tmp_path, capsys):
        xf, yf = write_samples(tmp_path, [1, 2], [3, 4])
        assert main(["test", "--x", xf, "--y", yf, "--tests", "tailrun"]) == 0
        report = json.loads(capsys.readouterr().out)
        row = report["tests"]["TAILRUN"]
        assert row["statistic"] == 2.0
        assert row["pvalue"] == pytest.approx(1 / 6)
        assert row["method"] == "exact"

    def test_wilcoxon_maximal(self, tmp_path, capsys):
        xf, yf = write_samples(tmp_path, [1, 2], [3, 4])
        assert main(["test", "--x", xf, "--y", yf, "--tests", "wilcoxon"]) == 0
        row = json.loads(capsys.readouterr().out)["tests"]["WILCOXON"]
        assert row["statistic"] == 4.0
        assert row["pvalue"] < 0.5

    def test_ties_exit_nonzero(self, tmp_path, capsys):
        xf, yf = write_samples(tmp_path, [1, 2], [1, 2])
        assert main(["test", "--x", xf, "--y", yf, "--tests", "wilcoxon"]) == 1
        err = capsys.readouterr().err
        assert "1.0" in err  # message names the duplicated value

    def test_dejitter_resolves_ties(self, tmp_path, capsys):
        xf, yf = write_samples(tmp_path, [1, 2], [1, 2])
        assert (
            main(["test", "--x", xf, "--y", yf, "--tests", "wilcoxon", "--dejitter"])
            == 0
        )

    def test_hc_with_mc_table(self, tmp_path, capsys):
        xf, yf = write_samples(tmp_path, [0.1, 0.4, 0.9], [0.2, 0.6, 1.3])
        assert (
            main(["test", "--x", xf, "--y", yf, "--tests", "hc", "--reps", "200"]) == 0
        )
        row = json.loads(capsys.readouterr().out)["tests"]["HC"]
        assert row["method"] == "monte-carlo"
        assert 0 < row["pvalue"] <= 1

    def test_json_roundtrip(self, tmp_path, capsys):
        xf, yf = write_samples(tmp_path, [1, 2], [3, 4])
        main(["test", "--x", xf, "--y", yf, "--tests", "ks,tailrun"])
        out = capsys.readouterr().out
        assert json.loads(json.dumps(json.loads(out))) == json.loads(out)


class TestCmdBoundary:
    def test_sparse_breakpoint(self, capsys):
        assert main(["boundary", "--beta", "0.75", "--gamma", "2", "--regime", "sparse"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.25)

    def test_sparse_gamma_one(self, capsys):
        main(["boundary", "--beta", "0.8", "--gamma", "1", "--regime", "sparse"])
        assert float(capsys.readouterr().out) == pytest.approx(0.6)

    def test_dense(self, capsys):
        main(["boundary", "--beta", "0.2", "--gamma", "0.25", "--regime", "dense"])
        assert float(capsys.readouterr().out) == pytest.approx(0.1)

    def test_out_of_range_exit(self, capsys):
        assert main(["boundary", "--beta", "1.5", "--gamma", "2", "--regime", "sparse"]) == 1


class TestCmdDiagnose:
    def test_lower_bound(self, capsys):
        assert main(["diagnose", "--condition", "lower-bound", "--gamma", "2", "--mu", "1"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["lower_bound_integral"] == pytest.approx(np.e - 1, rel=1e-6)

    def test_wilcoxon_tiny_mu(self, capsys):
        assert (
            main(
                [
                    "diagnose",
                    "--condition",
                    "wilcoxon",
                    "--epsilon",
                    "0.1",
                    "--mu",
                    "1e-9",
                    "--n",
                    "10000",
                ]
            )
            == 0
        )
        out = json.loads(capsys.readouterr().out)
        assert out["verdict"] == "no"

    def test_hc_strong_signal(self, capsys):
        assert (
            main(
                [
                    "diagnose",
                    "--condition",
                    "hc",
                    "--epsilon",
                    "0.3",
                    "--mu",
                    "5",
                    "--n",
                    "1000000",
                    "--t",
                    "0",
                ]
            )
            == 0
        )
        out = json.loads(capsys.readouterr().out)
        assert out["median_separation"]["verdict"] == "yes"

    def test_unknown_condition_exit(self, capsys):
        with pytest.raises(SystemExit):
            main(["diagnose", "--condition", "bogus"])


class TestCmdCalibrate:
    def test_deterministic_files(self, tmp_path, capsys):
        a = tmp_path / "a.npz"
        b = tmp_path / "b.npz"
        for out in (a, b):
            assert (
                main(
                    [
                        "calibrate",
                        "--statistic",
                        "HC",
                        "--m",
                        "50",
                        "--n",
                        "50",
                        "--reps",
                        "200",
                        "--seed",
                        "9",
                        "--out",
                        str(out),
                    ]
                )
                == 0
            )
        from mixdetect import load_null_table

        np.testing.assert_array_equal(load_null_table(a).draws, load_null_table(b).draws)

    def test_tailrun_refused(self, capsys):
        assert (
            main(["calibrate", "--statistic", "TAILRUN", "--m", "5", "--n", "5"]) == 1
        )
        assert "exact null" in capsys.readouterr().err

    def test_existing_file_requires_force(self, tmp_path, capsys):
        out = tmp_path / "t.npz"
        args = [
            "calibrate", "--statistic", "KS", "--m", "20", "--n", "20",
            "--reps", "150", "--seed", "1", "--out", str(out),
        ]
        assert main(args) == 0
        assert main(args) == 1
        assert main(args + ["--force"]) == 0

    def test_wilcoxon_quantile_matches_enumeration(self, tmp_path, capsys):
        out = tmp_path / "w.npz"
        assert (
            main(
                [
                    "calibrate", "--statistic", "WILCOXON", "--m", "4", "--n", "4",
                    "--reps", "100000", "--seed", "2", "--out", str(out),
                ]
            )
            == 0
        )
        report = json.loads(capsys.readouterr().out)
        from mixdetect import wilcoxon_exact_null

        pmf = wilcoxon_exact_null(4, 4)
        cdf = np.cumsum(pmf)
        exact_q95 = int(np.searchsorted(cdf, 0.95))
        assert abs(report["quantiles"]["0.95"] - exact_q95) <= 1.0


class TestCmdPower:
    def test_preset_writes_csv(self, tmp_path, capsys):
        args = [
            "power", "--preset", "normal-dense", "--scale", "0.001",
            "--reps", "5", "--out", str(tmp_path), "--seed", "3",
        ]
        assert main(args) == 0
        csv_path = tmp_path / "normal-dense.csv"
        lines = csv_path.read_text().strip().splitlines()
        assert len(lines) == 1 + 10 * 5  # 10 grid rows x 5 tests
        sidecar = json.loads((tmp_path / "normal-dense.json").read_text())
        assert sidecar["notes"]["figure"] == "normal-dense"

    def test_rerun_identical_bytes(self, tmp_path, capsys):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        for out in (out1, out2):
            main(
                [
                    "power", "--preset", "normal-moderate", "--scale", "0.001",
                    "--reps", "5", "--out", str(out), "--seed", "4",
                ]
            )
        assert (out1 / "normal-moderate.csv").read_bytes() == (
            out2 / "normal-moderate.csv"
        ).read_bytes()

    def test_config_and_preset_conflict(self, capsys):
        assert main(["power", "--preset", "normal-dense", "--config", "x.json"]) == 1

    def test_invalid_config_message(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"m": 10}))
        assert main(["power", "--config", str(cfg), "--out", str(tmp_path)]) == 1
        assert "config" in capsys.readouterr().err
