import json

import numpy as np
import pytest

from pebms import FiniteSpace, IterationTrace, __version__
from pebms.cli import main
from pebms.spaces import dumps_space


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCheck:
    def test_gallery_pass(self, capsys):
        code, out, _ = run_cli(capsys, ["check", "gallery:ebm_235", "--profile", "ebm"])
        assert code == 0
        assert "verdict: PASS" in out

    def test_gallery_fail_prints_witness(self, capsys):
        code, out, _ = run_cli(capsys, ["check", "gallery:pebm_absx", "--profile", "pebm"])
        assert code == 1
        assert "A3_symmetry" in out

    def test_missing_file(self, capsys):
        code, _, err = run_cli(capsys, ["check", "missing.json"])
        assert code == 2
        assert "missing.json" in err

    def test_malformed_json_reports_location(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"kind": "finite", "labels": [0, 1]')
        code, _, err = run_cli(capsys, ["check", str(bad)])
        assert code == 2
        assert "line" in err

    def test_file_space_round_trip(self, tmp_path, capsys):
        space = FiniteSpace((0, 1), [[0.0, 2.0], [2.0, 0.0]], [[1.0, 1.5], [1.5, 1.0]])
        fn = tmp_path / "space.json"
        fn.write_text(dumps_space(space))
        code, out, _ = run_cli(capsys, ["check", str(fn), "--format", "json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["tool"] == "pebms" and doc["version"] == __version__
        assert doc["input_digest"]
        assert doc["report"]["verdict"] == "pass"
        assert doc["report"]["checks_run"] == 3 * 4 + 8

    def test_analytic_space_from_file(self, tmp_path, capsys):
        fn = tmp_path / "a.json"
        fn.write_text(
            json.dumps(
                {"kind": "analytic", "domain": [0.0, 1.0], "p_form": "max(x, y)", "theta_form": "1 + x + y", "params": {}}
            )
        )
        code, out, _ = run_cli(capsys, ["check", str(fn), "--grid-n", "9", "--format", "json"])
        assert code == 0
        assert json.loads(out)["report"]["grid_relative"] is True

    def test_profile_with_coefficient(self, capsys):
        code, _, _ = run_cli(capsys, ["check", "gallery:pbm_power", "--profile", "pbm", "--s", "4.0"])
        assert code == 0

    def test_bad_profile_coefficient(self, capsys):
        code, _, err = run_cli(capsys, ["check", "gallery:pbm_power", "--profile", "pbm"])
        assert code == 2
        assert "coefficient" in err


class TestSolve:
    def test_banach_on_max_space(self, tmp_path, capsys):
        trace_file = tmp_path / "trace.csv"
        code, out, _ = run_cli(
            capsys,
            [
                "solve", "gallery:pebm_max", "--map", "x/4", "--family", "banach",
                "--k", "0.25", "--x0", "1", "--trace-out", str(trace_file), "--format", "json",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        cert = doc["report"]["certificate"]
        assert abs(cert["fixed_point"]) <= 1e-9
        assert cert["residual"] <= 1e-9
        assert all(p["verified"] for p in cert["preconditions"])
        trace = IterationTrace.from_csv(trace_file.read_text())
        assert len(trace) == cert["iterations"] + 1

    def test_flawed_space_warns_but_solves(self, capsys):
        code, out, err = run_cli(
            capsys,
            ["solve", "gallery:pebm_absx", "--map", "x/4", "--family", "kannan", "--k", "0.45", "--x0", "1", "--format", "json"],
        )
        assert code == 1
        assert "preconditions failed" in err
        doc = json.loads(out)
        names = {p["name"]: p["verified"] for p in doc["report"]["certificate"]["preconditions"]}
        assert names["space_axioms"] is False
        assert abs(doc["report"]["certificate"]["fixed_point"]) <= 1e-9

    def test_inadmissible_k(self, capsys):
        code, _, err = run_cli(
            capsys, ["solve", "gallery:pebm_max", "--map", "x/4", "--family", "kannan", "--k", "0.6", "--x0", "1"]
        )
        assert code == 2
        assert "k in [0, 0.5)" in err

    def test_nonconvergence_exit_three(self, capsys):
        code, _, _ = run_cli(
            capsys,
            ["solve", "gallery:pebm_max", "--map", "x", "--family", "banach", "--k", "0.9", "--x0", "0.5", "--max-iter", "40"],
        )
        assert code == 3

    def test_finite_space_with_table_map(self, capsys):
        # k = 0.15 keeps 1/k above the orbit-tail control value theta(0,0) = 5
        code, out, _ = run_cli(
            capsys,
            ["solve", "gallery:ebm_235", "--map", "0,0,0", "--family", "banach", "--k", "0.15", "--x0", "3", "--format", "json"],
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["certificate"]["fixed_point"] == 0

    def test_bad_map_for_finite_space(self, capsys):
        code, _, err = run_cli(
            capsys, ["solve", "gallery:ebm_235", "--map", "x/4", "--family", "banach", "--k", "0.5", "--x0", "2"]
        )
        assert code == 2
        assert "table" in err

    def test_csv_format_emits_trace(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["solve", "gallery:pebm_max", "--map", "x/4", "--family", "banach", "--k", "0.25", "--x0", "1", "--format", "csv"],
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "n,x,step_dist,self_dist,bound,n_self"
        assert lines[1].startswith("0,1.0,")
        trace = IterationTrace.from_csv(out)
        assert len(trace) == 16

    def test_csv_format_rejected_elsewhere(self, capsys):
        code, _, err = run_cli(capsys, ["check", "gallery:ebm_235", "--format", "csv"])
        assert code == 2
        assert "csv" in err

    def test_text_reports_are_self_describing(self, capsys):
        code, out, _ = run_cli(capsys, ["check", "gallery:ebm_235", "--profile", "ebm"])
        assert code == 0
        header = out.splitlines()[0]
        assert header.startswith(f"# pebms {__version__}")
        assert "profile=ebm" in header and "sha256:" in header


class TestGallery:
    def test_exit_zero_and_seven_entries(self, capsys):
        code, out, _ = run_cli(capsys, ["gallery", "--format", "json"])
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["overall"] == "pass"
        assert len(doc["report"]["entries"]) == 7

    def test_text_table(self, capsys):
        code, out, _ = run_cli(capsys, ["gallery", "--format", "text", "--grid-n", "9"])
        assert code == 0
        assert "overall: PASS (7/7 match)" in out

    def test_coarse_grid_same_verdicts(self, capsys):
        code, _, _ = run_cli(capsys, ["gallery", "--grid-n", "5"])
        assert code == 0


class TestFuzz:
    def test_small_campaign(self, capsys):
        code, out, _ = run_cli(capsys, ["fuzz", "--trials", "25", "--seed", "42", "--format", "json"])
        assert code == 0
        rep = json.loads(out)["report"]
        assert rep["generated_pass"] == 25
        assert rep["mutations_missed"] == 0
        assert rep["consistent"] is True

    def test_single_trial(self, capsys):
        code, _, _ = run_cli(capsys, ["fuzz", "--trials", "1", "--seed", "5"])
        assert code == 0

    def test_saved_counterexample_replays_identically(self, tmp_path, capsys):
        outdir = tmp_path / "ces"
        code, _, _ = run_cli(
            capsys, ["fuzz", "--trials", "10", "--seed", "42", "--save-counterexamples", str(outdir), "--format", "json"]
        )
        assert code == 0
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest
        first = manifest[0]
        code, out, _ = run_cli(capsys, ["check", str(outdir / first["file"]), "--profile", "pebm", "--format", "json"])
        assert code == 1
        replayed = json.loads(out)["report"]["violations"]
        assert first["violation"] in replayed  # bit-exact lhs/rhs/margin survive the round trip

    def test_bad_config(self, capsys):
        code, _, _ = run_cli(capsys, ["fuzz", "--trials", "0"])
        assert code == 2


class TestBound:
    @pytest.fixture
    def trace_file(self, tmp_path, capsys):
        fn = tmp_path / "trace.csv"
        code, _, _ = run_cli(
            capsys,
            ["solve", "gallery:pebm_max", "--map", "x/4", "--family", "banach", "--k", "0.25", "--x0", "1",
             "--trace-out", str(fn), "--tol", "1e-12"],
        )
        assert code == 0
        return fn

    def test_banach_bound_from_saved_trace(self, trace_file, capsys):
        code, out, _ = run_cli(
            capsys,
            ["bound", "--family", "banach", "--trace", str(trace_file), "--space", "gallery:pebm_max",
             "--k", "0.25", "--n", "2", "--m", "5", "--format", "json"],
        )
        assert code == 0
        doc = json.loads(out)["report"]
        assert doc["value"] > 0
        assert len(doc["terms"]) == 3
        # dominance against the observed distance max(x_2, x_5) = 4^-2
        assert 4.0**-2 <= doc["value"]

    def test_kannan_bound_direct(self, capsys):
        code, out, _ = run_cli(
            capsys, ["bound", "--family", "kannan", "--k", "0.3333", "--n", "0", "--p01", "2.5", "--format", "json"]
        )
        assert code == 0
        assert json.loads(out)["report"]["value"] == 2.5

    def test_kannan_bound_p01_from_trace(self, trace_file, capsys):
        code, out, _ = run_cli(
            capsys, ["bound", "--family", "kannan", "--trace", str(trace_file), "--k", "0.25", "--n", "1", "--format", "json"]
        )
        assert code == 0
        assert json.loads(out)["report"]["p01"] == 1.0

    def test_modkannan_bounds(self, trace_file, capsys):
        code, out, _ = run_cli(
            capsys,
            ["bound", "--family", "modified_kannan", "--trace", str(trace_file), "--k", "0.333", "--n", "2", "--m", "3", "--format", "json"],
        )
        assert code == 0
        rep = json.loads(out)["report"]
        assert rep["window_bound"] > 0 and rep["step_bound"] > 0

    def test_missing_inputs(self, capsys):
        code, _, err = run_cli(capsys, ["bound", "--family", "banach", "--k", "0.25", "--n", "0", "--m", "1"])
        assert code == 2
        assert "--trace" in err


class TestParser:
    def test_no_subcommand_is_usage_error(self, capsys):
        assert main([]) == 2

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_json_output_newline_terminated(self, capsys):
        code, out, _ = run_cli(capsys, ["check", "gallery:ebm_235", "--format", "json"])
        assert code == 0
        assert out.endswith("\n")
