import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from mirage import circuit, cli, coverage, qasm

BENCH = Path(cli.__file__).parent / "data" / "bench"


def run_cli(args, cov_cache, out: Path):
    argv = list(args) + ["--cache-dir", str(cov_cache), "--out", str(out)]
    code = cli.main(argv)
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


def strip_timing(report):
    report = dict(report)
    report.pop("wall_clock_s", None)
    return report


class TestTranspile:
    def test_twolocal_anchor(self, cov_cache, tmp_path):
        code, rep = run_cli(
            ["transpile", "--input", str(BENCH / "twolocal_4_full.qasm"),
             "--topology", "line:4", "--mode", "mirage", "--metric", "depth",
             "--trials", "20", "--seed", "7", "--verify"],
            cov_cache, tmp_path / "r.json")
        assert code == 0
        rec = rep["record"]
        assert rec["swap_count"] == 0
        assert rec["pulse_depth"] <= 5.0
        assert rec["verified"] is True
        assert len(rec["trials"]) == 20

    def test_sabre_mode_worse_on_twolocal(self, cov_cache, tmp_path):
        base = ["transpile", "--input", str(BENCH / "twolocal_4_full.qasm"),
                "--topology", "line:4", "--metric", "depth", "--trials", "20",
                "--seed", "7"]
        _, mir = run_cli(base + ["--mode", "mirage"], cov_cache, tmp_path / "m.json")
        _, sab = run_cli(base + ["--mode", "sabre"], cov_cache, tmp_path / "s.json")
        assert sab["record"]["swap_count"] >= 1
        assert sab["record"]["pulse_depth"] >= mir["record"]["pulse_depth"]

    def test_aggression0_equals_sabre(self, cov_cache, tmp_path):
        base = ["transpile", "--input", str(BENCH / "ghz_star_8.qasm"),
                "--topology", "grid:3x3", "--trials", "4",
                "--layout-trials", "2", "--layout-passes", "1", "--seed", "3"]
        _, a = run_cli(base + ["--mode", "mirage", "--aggression", "0"],
                       cov_cache, tmp_path / "a.json")
        _, b = run_cli(base + ["--mode", "sabre"], cov_cache, tmp_path / "b.json")
        for key in ("pulse_depth", "total_cost", "swap_count"):
            assert a["record"][key] == b["record"][key]

    def test_deterministic_reports(self, cov_cache, tmp_path):
        args = ["transpile", "--input", str(BENCH / "twolocal_4_full.qasm"),
                "--topology", "line:4", "--trials", "4", "--layout-trials", "2",
                "--layout-passes", "1", "--seed", "11"]
        _, a = run_cli(args, cov_cache, tmp_path / "r.json")
        _, b = run_cli(args, cov_cache, tmp_path / "r.json")
        assert strip_timing(a) == strip_timing(b)

    def test_emit_qasm_rederivable(self, cov_cache, tmp_path):
        out_qasm = tmp_path / "out.qasm"
        code, rep = run_cli(
            ["transpile", "--input", str(BENCH / "twolocal_4_full.qasm"),
             "--topology", "line:4", "--trials", "4", "--layout-trials", "2",
             "--layout-passes", "1", "--seed", "2",
             "--emit-qasm", str(out_qasm)],
            cov_cache, tmp_path / "r.json")
        assert code == 0 and out_qasm.exists()
        basis = coverage.BasisGateSpec.iswap_root(2)
        cs = coverage.get_coverage(basis, cache_dir=cov_cache)
        dag = circuit.consolidate_blocks(qasm.lower(qasm.parse(out_qasm.read_text())))
        m = circuit.metrics(dag, basis, cs)
        assert m.pulse_depth == pytest.approx(rep["record"]["pulse_depth"])
        assert m.total_cost == pytest.approx(rep["record"]["total_cost"])

    def test_error_record_on_missing_file(self, cov_cache, tmp_path):
        code, rep = run_cli(
            ["transpile", "--input", str(tmp_path / "nope.qasm"),
             "--topology", "line:4"], cov_cache, tmp_path / "r.json")
        assert code == 1
        assert "error" in rep and rep["error"]["type"]

    def test_too_small_topology_is_usage_error(self, cov_cache, tmp_path):
        code, _ = run_cli(
            ["transpile", "--input", str(BENCH / "qft_8.qasm"),
             "--topology", "line:4"], cov_cache, tmp_path / "r.json")
        assert code == 2


class TestScoreCommand:
    def test_exact(self, cov_cache, tmp_path):
        code, rep = run_cli(["score", "--basis", "sqiswap", "--samples", "5000",
                             "--seed", "1"], cov_cache, tmp_path / "r.json")
        assert code == 0
        assert rep["record"]["score"] == pytest.approx(1.105, abs=0.02)

    def test_zero_samples_usage_error(self, cov_cache, tmp_path):
        with pytest.raises(SystemExit) as err:
            cli.main(["score", "--samples", "0"])
        assert err.value.code == 2

    def test_determinism(self, cov_cache, tmp_path):
        args = ["score", "--basis", "sqiswap", "--samples", "2000",
                "--mirror", "on", "--seed", "9"]
        _, a = run_cli(args, cov_cache, tmp_path / "r.json")
        _, b = run_cli(args, cov_cache, tmp_path / "r.json")
        assert strip_timing(a) == strip_timing(b)


class TestCoverageCommand:
    def test_volume(self, cov_cache, tmp_path):
        code, rep = run_cli(
            ["coverage", "--basis", "sqiswap", "--k", "2", "--samples", "20000",
             "--seed", "4"], cov_cache, tmp_path / "r.json")
        assert code == 0
        assert rep["record"]["volume"] == pytest.approx(0.790, abs=0.015)

    def test_bad_k(self, cov_cache, tmp_path):
        code, _ = run_cli(["coverage", "--basis", "sqiswap", "--k", "9"],
                          cov_cache, tmp_path / "r.json")
        assert code == 2


class TestBenchCommand:
    def test_empty_suite(self, cov_cache, tmp_path):
        suite = tmp_path / "suite"
        suite.mkdir()
        (suite / "manifest.json").write_text('{"circuits": []}')
        code, rep = run_cli(
            ["bench", "--suite", str(suite), "--topology", "line:4",
             "--instances", "1", "--trials", "2", "--layout-trials", "1",
             "--layout-passes", "1"], cov_cache, tmp_path / "r.json")
        assert code == 0
        assert rep["record"]["circuits"] == []

    def test_missing_manifest(self, cov_cache, tmp_path):
        suite = tmp_path / "suite"
        suite.mkdir()
        code, _ = run_cli(["bench", "--suite", str(suite),
                           "--topology", "line:4"], cov_cache, tmp_path / "r.json")
        assert code == 2

    def test_per_circuit_errors_recorded(self, cov_cache, tmp_path):
        suite = tmp_path / "suite"
        suite.mkdir()
        (suite / "manifest.json").write_text(
            '{"circuits": [{"file": "missing.qasm", "name": "ghost"}]}')
        code, rep = run_cli(
            ["bench", "--suite", str(suite), "--topology", "line:4",
             "--instances", "1", "--trials", "2", "--layout-trials", "1",
             "--layout-passes", "1"], cov_cache, tmp_path / "r.json")
        assert code == 0
        assert rep["record"]["circuits"][0]["error"]["type"]


class TestEntryPoint:
    def test_module_invocation(self, cov_cache, tmp_path):
        out = tmp_path / "r.json"
        proc = subprocess.run(
            [sys.executable, "-m", "mirage.cli", "coverage", "--basis",
             "sqiswap", "--k", "0", "--samples", "1000", "--cache-dir",
             str(cov_cache), "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert json.loads(out.read_text())["record"]["volume"] == 0.0
