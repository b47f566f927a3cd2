import csv
import json

import numpy as np
import pytest

from fraclap.cli import EXIT_BLOWUP, EXIT_INVALID, EXIT_OK, main
from fraclap.opmatrix import load_matrix


def run_cli(*args):
    return main(list(args))


class TestMatrixBuild:
    def test_build_writes_cache_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "m.bin"
        code = run_cli(
            "matrix", "build", "--n", "8", "--alpha", "0.5", "--L", "1.0",
            "--llim", "60", "--out", str(out),
        )
        assert code == EXIT_OK
        matrix = load_matrix(out, expect_n=8, expect_alpha=0.5, expect_l_lim=60)
        assert matrix.entries.shape == (16, 16)
        manifest = json.loads((tmp_path / "m.bin.manifest.json").read_text())
        assert manifest["command"] == "matrix build"
        assert manifest["parameters"]["n"] == 8
        assert "column_crc32" in manifest["diagnostics"]
        shown = capsys.readouterr().out
        assert "crc32" in shown

    def test_rebuild_is_bit_identical(self, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        flags = ["--n", "8", "--alpha", "0.75", "--L", "2.0", "--llim", "40"]
        assert run_cli("matrix", "build", *flags, "--out", str(a)) == EXIT_OK
        assert run_cli("matrix", "build", *flags, "--out", str(b)) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_alpha_out_of_range(self, tmp_path):
        code = run_cli(
            "matrix", "build", "--n", "8", "--alpha", "2.0", "--L", "1.0",
            "--llim", "10", "--out", str(tmp_path / "m.bin"),
        )
        assert code == EXIT_INVALID

    def test_odd_n_rejected(self, tmp_path):
        code = run_cli(
            "matrix", "build", "--n", "7", "--alpha", "0.5", "--L", "1.0",
            "--llim", "10", "--out", str(tmp_path / "m.bin"),
        )
        assert code == EXIT_INVALID


class TestValidate:
    def test_mode2_scan_passes_tolerance(self, tmp_path):
        out = tmp_path / "scan.csv"
        code = run_cli(
            "validate", "--target", "mode2", "--n", "16", "--llim", "360",
            "--alpha-grid", "0.25:1.75:0.25", "--tolerance", "1e-11",
            "--out", str(out),
        )
        assert code == EXIT_OK
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["alpha", "max_node_error"]
        alphas = [float(r[0]) for r in rows[1:]]
        assert 1.0 not in alphas
        assert max(float(r[1]) for r in rows[1:]) < 1e-11

    def test_mode2_tolerance_failure_exit_code(self, tmp_path):
        code = run_cli(
            "validate", "--target", "mode2", "--n", "16", "--llim", "0",
            "--alpha-grid", "0.5:0.5:1.0", "--tolerance", "1e-13",
            "--out", str(tmp_path / "scan.csv"),
        )
        assert code == EXIT_INVALID

    def test_gaussian_scan(self, tmp_path):
        out = tmp_path / "g.csv"
        code = run_cli(
            "validate", "--target", "gaussian", "--n", "16", "--llim", "300",
            "--alpha-grid", "0.5:1.5:0.5", "--out", str(out),
        )
        assert code == EXIT_OK
        rows = list(csv.reader(out.open()))
        assert len(rows) == 4  # header + 3 alphas (grid includes alpha = 1)

    def test_l_sweep_finds_interior_optimum(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run_cli(
            "validate", "--target", "gaussian", "--n", "32", "--llim", "300",
            "--alpha-grid", "0.6:1.4:0.4", "--l-sweep", "1.0:8.0:1.0",
            "--out", str(out),
        )
        assert code == EXIT_OK
        rows = list(csv.reader(out.open()))[1:]
        errs = {float(L): float(e) for L, e in rows}
        assert len(errs) == 8
        best = min(errs, key=errs.get)
        assert 1.0 < best < 8.0

    def test_quadrature_target(self, tmp_path):
        out = tmp_path / "q.csv"
        code = run_cli(
            "validate", "--target", "quadrature", "--n", "64", "--L", "4.6",
            "--llim", "300", "--alpha-grid", "1.0:1.0:1.0",
            "--tolerance", "1e-5", "--out", str(out),
        )
        assert code == EXIT_OK
        rows = list(csv.reader(out.open()))
        assert rows[0][0] == "alpha"
        assert len(rows) == 4  # header + 3 probe points


class TestFisher:
    def test_single_run_outputs(self, tmp_path):
        out_dir = tmp_path / "runs"
        code = run_cli(
            "fisher", "--alpha", "1.2", "--n", "64", "--dt", "0.01",
            "--tfinal", "0.4", "--L", "50.0", "--llim", "200",
            "--fit-window", "0.1:0.4", "--sample-stride", "10",
            "--out-dir", str(out_dir),
        )
        assert code == EXIT_OK
        trace = out_dir / "trace_alpha1.2.csv"
        rows = list(csv.reader(trace.open()))
        assert rows[0] == ["t", "x05", "ln_x05"]
        t = [float(r[0]) for r in rows[1:]]
        assert t[0] == 0.0 and t[-1] == pytest.approx(0.4)
        for r in rows[1:]:
            assert float(r[2]) == pytest.approx(np.log(float(r[1])), abs=1e-12)
        summary = list(csv.reader((out_dir / "summary.csv").open()))
        assert summary[0] == ["alpha", "sigma", "predicted", "rel_gap", "fit_residual", "status"]
        assert summary[1][-1] == "ok"
        manifest = json.loads((out_dir / "fisher.manifest.json").read_text())
        assert manifest["command"] == "fisher"
        assert "alpha_1.2" in manifest["diagnostics"]

    def test_matrix_cache_reuse(self, tmp_path):
        cache = tmp_path / "cache"
        args = [
            "fisher", "--alpha", "1.2", "--n", "64", "--dt", "0.01",
            "--tfinal", "0.2", "--L", "50.0", "--llim", "200",
            "--fit-window", "0.05:0.2", "--sample-stride", "5",
            "--matrix-cache", str(cache),
        ]
        assert run_cli(*args, "--out-dir", str(tmp_path / "r1")) == EXIT_OK
        cached = list(cache.glob("*.bin"))
        assert len(cached) == 1
        stamp = cached[0].stat().st_mtime_ns
        assert run_cli(*args, "--out-dir", str(tmp_path / "r2")) == EXIT_OK
        assert cached[0].stat().st_mtime_ns == stamp  # loaded, not rebuilt

    def test_determinism_across_runs(self, tmp_path):
        args = [
            "fisher", "--alpha", "0.9", "--n", "64", "--dt", "0.01",
            "--tfinal", "0.3", "--L", "100.0", "--llim", "150",
            "--fit-window", "0.1:0.3",
        ]
        assert run_cli(*args, "--out-dir", str(tmp_path / "a")) == EXIT_OK
        assert run_cli(*args, "--out-dir", str(tmp_path / "b")) == EXIT_OK
        ta = (tmp_path / "a" / "trace_alpha0.9.csv").read_bytes()
        tb = (tmp_path / "b" / "trace_alpha0.9.csv").read_bytes()
        assert ta == tb

    def test_sweep_produces_summary_per_alpha(self, tmp_path):
        out_dir = tmp_path / "sweep"
        code = run_cli(
            "fisher", "--alpha-sweep", "1.0:1.4:0.2", "--n", "32", "--dt", "0.01",
            "--tfinal", "0.3", "--L", "30.0", "--llim", "100",
            "--fit-window", "0.1:0.3", "--out-dir", str(out_dir),
        )
        assert code == EXIT_OK
        summary = list(csv.reader((out_dir / "summary.csv").open()))
        assert len(summary) == 4  # header + 3 alphas

    def test_zero_dt_rejected(self, tmp_path):
        code = run_cli(
            "fisher", "--alpha", "1.2", "--n", "32", "--dt", "0",
            "--tfinal", "1.0", "--out-dir", str(tmp_path / "x"),
        )
        assert code == EXIT_INVALID

    def test_blowup_exit_code(self, tmp_path):
        # a huge step on a stiff grid blows up immediately
        code = run_cli(
            "fisher", "--alpha", "1.9", "--n", "64", "--dt", "5.0",
            "--tfinal", "20.0", "--L", "1.0", "--llim", "100",
            "--fit-window", "10:20", "--out-dir", str(tmp_path / "x"),
        )
        assert code == EXIT_BLOWUP

    def test_missing_alpha_rejected(self, tmp_path):
        code = run_cli(
            "fisher", "--n", "32", "--dt", "0.01", "--tfinal", "1.0",
            "--out-dir", str(tmp_path / "x"),
        )
        assert code == EXIT_INVALID


class TestSpanGrammar:
    def test_bad_span_rejected(self, tmp_path):
        code = run_cli(
            "validate", "--target", "mode2", "--n", "16", "--llim", "10",
            "--alpha-grid", "0.5:0.1", "--out", str(tmp_path / "s.csv"),
        )
        assert code == EXIT_INVALID

    def test_bad_window_rejected(self, tmp_path):
        code = run_cli(
            "fisher", "--alpha", "1.2", "--n", "32", "--dt", "0.01",
            "--tfinal", "1.0", "--fit-window", "3:1",
            "--out-dir", str(tmp_path / "x"),
        )
        assert code == EXIT_INVALID
