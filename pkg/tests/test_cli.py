"""Command line behavior: flags, exit codes, files, summary output."""

import json
import os

import pytest

from sstep.cli import build_parser, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_success_run(self, tmp_path, capsys):
        code, out, err = run_cli(
            capsys, "--matrix", "diag:40:0.5:5.0", "--s0", "5",
            "--restart", "20", "--out", str(tmp_path))
        assert code == 0
        assert "converged after" in out
        assert "final relative residual" in out
        assert os.path.exists(tmp_path / "adaptive-monomial.csv")
        assert os.path.exists(tmp_path / "adaptive-monomial.json")

    def test_usage_error_is_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--matrix", "diag:4:1:2", "--solver", "cgs"])
        assert exc.value.code == 1

    def test_missing_required_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 1

    def test_missing_matrix_file(self, tmp_path, capsys):
        code, out, err = run_cli(
            capsys, "--matrix", str(tmp_path / "nope.mtx"), "--out", str(tmp_path))
        assert code == 1
        assert "error" in err

    def test_bad_generator_spec(self, tmp_path, capsys):
        code, out, err = run_cli(
            capsys, "--matrix", "diag:10:1", "--out", str(tmp_path))
        assert code == 1
        assert "diag spec" in err

    @pytest.mark.parametrize("solver", ["adaptive", "gmres"])
    def test_breakdown_is_two(self, tmp_path, capsys, solver):
        # singular matrix with a right hand side outside its range
        code, out, err = run_cli(
            capsys, "--matrix", "diag:2:0:1", "--solver", solver,
            "--rhs", "random", "--seed", "4", "--restart", "8",
            "--s0", "3", "--out", str(tmp_path))
        assert code == 2
        assert "broke down" in out

    def test_budget_exhaustion_is_zero(self, tmp_path, capsys):
        code, out, err = run_cli(
            capsys, "--matrix", "lap2d:12", "--restart", "10",
            "--max-restarts", "0", "--tol", "1e-14", "--out", str(tmp_path))
        assert code == 0
        assert "stopped after" in out


class TestFlagsReachTheRun:
    def test_summary_reflects_choices(self, tmp_path, capsys):
        code, out, _ = run_cli(
            capsys, "--matrix", "diag:30:1:3", "--solver", "gmres",
            "--basis", "monomial", "--s0", "4", "--restart", "15",
            "--tol", "1e-8", "--rhs", "random", "--seed", "11",
            "--loo", "on", "--out", str(tmp_path))
        assert code == 0
        with open(tmp_path / "gmres-monomial.json") as f:
            meta = json.load(f)
        assert meta["solver"]["kind"] == "gmres"
        assert meta["solver"]["restart_len"] == 15
        assert meta["solver"]["rel_tol"] == 1e-8
        assert meta["solver"]["track_loo"] is True
        assert meta["problem"]["seed"] == 11
        with open(tmp_path / "gmres-monomial.csv") as f:
            header = f.readline().strip()
        assert header == "iter,rel_res,loo,block_size,reductions_cum,spmv_cum"

    def test_estimator_flag(self, tmp_path, capsys):
        code, _, _ = run_cli(
            capsys, "--matrix", "diag:50:0.5:5", "--s0", "8",
            "--restart", "30", "--estimator", "on", "--out", str(tmp_path))
        assert code == 0
        with open(tmp_path / "adaptive-monomial.json") as f:
            meta = json.load(f)
        assert meta["result"]["s0_star"] is not None
        assert meta["solver"]["use_step_estimator"] is True

    def test_parser_defaults(self):
        args = build_parser().parse_args(["--matrix", "diag:4:1:2"])
        assert args.solver == "adaptive"
        assert args.basis == "monomial"
        assert args.s0 == 10
        assert args.restart == 100
        assert args.tol == 1e-10
        assert args.omega == 1e7
        assert args.rhs == "ones"
