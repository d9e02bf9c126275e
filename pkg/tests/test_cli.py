"""Tests for the command line, driven through cli_main on temporary directories."""

import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd

from phasekit.core.signal import Signal
from phasekit.main import cli_main
from phasekit.storage.signal_io import read_observation, read_signal, write_signal, write_signal_csv
from phasekit.utils.errors import NumericalFailure


def run_cli(*argv):
    """Run the CLI; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli_main(["--log-level", "WARNING", *argv])
    return code, out.getvalue(), err.getvalue()


class CliTestCase(unittest.TestCase):
    def setUp(self):
        """Set up a scratch directory."""
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()


class TestUsage(CliTestCase):
    """Test cases for argument handling and exit codes."""

    def test_missing_subcommand(self):
        self.assertEqual(run_cli()[0], 1)

    def test_missing_required_option(self):
        self.assertEqual(run_cli("solve", "--alg", "hio")[0], 1)

    def test_help_exits_cleanly(self):
        code, out, _ = run_cli("bench", "--help")
        self.assertEqual(code, 0)
        self.assertIn("--spec", out)

    def test_bad_log_level(self):
        code = cli_main(["--log-level", "LOUD", "bench", "--schema"])
        self.assertEqual(code, 1)


class TestGenerateAndSolve(CliTestCase):
    """Test cases for `generate` followed by `solve`."""

    def setUp(self):
        super().setUp()
        self.data = self.dir / "data"
        code, _, err = run_cli("generate", "--scene", "sparse", "--n", "16", "--k", "2", "--seed", "3", "--out", str(self.data))
        self.assertEqual(code, 0, err)

    def test_generate_writes_inputs(self):
        for name in ("truth.bin", "truth.csv", "obs.bin", "support.bin", "scene.json"):
            self.assertTrue((self.data / name).exists(), name)
        self.assertEqual(read_observation(self.data / "obs.bin").shape, (32,))
        scene = json.loads((self.data / "scene.json").read_text())
        self.assertEqual(scene["sparsity"], 2)
        self.assertEqual(scene["seed"], 3)

    def test_generate_validation_error(self):
        code, _, err = run_cli("generate", "--scene", "phantom", "--size", "8", "--out", str(self.dir / "bad"))
        self.assertEqual(code, 1)
        self.assertIn("size", err)

    def test_solve_hio(self):
        out = self.dir / "run"
        obs_before = (self.data / "obs.bin").read_bytes()
        code, _, err = run_cli(
            "solve", "--alg", "hio",
            "--obs", str(self.data / "obs.bin"),
            "--support", str(self.data / "support.bin"),
            "--params", '{"max_iters": 50}',
            "--out", str(out),
        )
        self.assertEqual(code, 0, err)
        self.assertEqual(read_signal(out / "recon.bin").shape, (32,))
        metrics = json.loads((out / "metrics.json").read_text())
        self.assertEqual(metrics["algorithm"], "hio")
        self.assertIsNone(metrics["aligned_residual"])
        self.assertIsNotNone(metrics["R_F"])
        self.assertEqual(len(pd.read_csv(out / "trace.csv")), metrics["iterations"])
        self.assertEqual((self.data / "obs.bin").read_bytes(), obs_before)

    def test_solve_with_truth_reports_error(self):
        code, _, err = run_cli(
            "solve", "--alg", "gespar",
            "--obs", str(self.data / "obs.bin"),
            "--truth", str(self.data / "truth.bin"),
            "--sparsity", "2",
            "--out", str(self.dir / "gespar"),
        )
        self.assertEqual(code, 0, err)
        metrics = json.loads((self.dir / "gespar" / "metrics.json").read_text())
        self.assertIsNotNone(metrics["E"])
        self.assertEqual(read_signal(self.dir / "gespar" / "recon.bin").shape, (16,))

    def test_solve_rejects_unknown_parameter(self):
        code, _, err = run_cli(
            "solve", "--alg", "er", "--obs", str(self.data / "obs.bin"),
            "--support", str(self.data / "support.bin"), "--params", '{"bogus": 1}',
            "--out", str(self.dir / "x"),
        )
        self.assertEqual(code, 1)
        self.assertIn("bogus", err)

    def test_solve_refuses_to_overwrite_input(self):
        first = run_cli(
            "solve", "--alg", "er", "--obs", str(self.data / "obs.bin"),
            "--support", str(self.data / "support.bin"), "--params", '{"max_iters": 5}', "--out", str(self.data),
        )
        self.assertEqual(first[0], 0, first[2])
        before = (self.data / "recon.bin").read_bytes()
        code, _, err = run_cli(
            "solve", "--alg", "er", "--obs", str(self.data / "obs.bin"),
            "--support", str(self.data / "support.bin"), "--truth", str(self.data / "recon.bin"),
            "--out", str(self.data),
        )
        self.assertEqual(code, 1)
        self.assertIn("overwrite", err)
        self.assertEqual((self.data / "recon.bin").read_bytes(), before)

    def test_numerical_failure_exit_code(self):
        with patch("phasekit.commands.solve.run_solver", side_effect=NumericalFailure("non-finite iterate")):
            code, _, _ = run_cli(
                "solve", "--alg", "er", "--obs", str(self.data / "obs.bin"),
                "--support", str(self.data / "support.bin"), "--out", str(self.dir / "fail"),
            )
        self.assertEqual(code, 2)
        metrics = json.loads((self.dir / "fail" / "metrics.json").read_text())
        self.assertIn("non-finite", metrics["error"])

    def test_lifted_solve_on_general_linear(self):
        data = self.dir / "gl"
        code, _, err = run_cli(
            "generate", "--scene", "gaussian", "--n", "4", "--model", "general_linear", "--out", str(data)
        )
        self.assertEqual(code, 0, err)
        self.assertEqual(read_signal(data / "vectors.bin").shape, (24, 4))
        code, _, err = run_cli(
            "solve", "--alg", "phaselift", "--obs", str(data / "obs.bin"), "--vectors", str(data / "vectors.bin"),
            "--truth", str(data / "truth.bin"), "--params", '{"inner_iters": 200}', "--out", str(data / "run"),
        )
        self.assertEqual(code, 0, err)
        self.assertEqual(read_signal(data / "run" / "recon.bin").shape, (4,))


class TestBench(CliTestCase):
    """Test cases for `bench`."""

    def write_spec(self, payload):
        path = self.dir / "spec.json"
        path.write_text(json.dumps(payload))
        return path

    def test_summary_header_and_reproducibility(self):
        spec = self.write_spec({
            "name": "tiny",
            "scene": {"kind": "sparse", "n": 16},
            "model": {"oversampling": 2.0},
            "solvers": [{"name": "truth"}, {"name": "er", "params": {"max_iters": 10}}],
            "trials": 2,
            "base_seed": 7,
            "sweep": {"parameter": "k", "values": [1, 3]},
        })
        first, second = self.dir / "first", self.dir / "second"
        self.assertEqual(run_cli("bench", "--spec", str(spec), "--out", str(first), "--threads", "2")[0], 0)
        self.assertEqual(run_cli("bench", "--spec", str(spec), "--out", str(second), "--threads", "1")[0], 0)
        summary = (first / "summary.csv").read_text()
        self.assertTrue(summary.startswith("solver,k,trials,successes,rate,ci_lo,ci_hi"))
        self.assertEqual(summary, (second / "summary.csv").read_text())
        self.assertTrue((first / "trials.csv").exists())
        self.assertIn("paired", json.loads((first / "summary.json").read_text()))

    def test_malformed_spec_names_field(self):
        spec = self.write_spec({"solvers": [{"name": "truth"}], "trials": -3})
        code, _, err = run_cli("bench", "--spec", str(spec), "--out", str(self.dir / "r"))
        self.assertEqual(code, 1)
        self.assertIn("trials", err)

    def test_invalid_json(self):
        path = self.dir / "broken.json"
        path.write_text("{not json")
        self.assertEqual(run_cli("bench", "--spec", str(path))[0], 1)

    def test_schema(self):
        code, out, _ = run_cli("bench", "--schema")
        self.assertEqual(code, 0)
        schema = json.loads(out)
        self.assertIn("solvers", schema["properties"])

    def test_needs_spec(self):
        self.assertEqual(run_cli("bench")[0], 1)


class TestDiagnose(CliTestCase):
    """Test cases for `diagnose`."""

    def test_collision_witness(self):
        path = write_signal_csv(self.dir / "x.csv", Signal(np.array([1.0, 1.0, 1.0, 0.0])))
        code, out, _ = run_cli("diagnose", "--collision-free", "--signal", str(path))
        self.assertEqual(code, 0)
        self.assertIn("collision_free: false", out)
        self.assertIn("witness: ", out)

    def test_collision_free(self):
        path = write_signal_csv(self.dir / "x.csv", Signal(np.array([1.0, 1.0, 0.0, 0.0, 1.0])))
        code, out, _ = run_cli("diagnose", "--collision-free", "--signal", str(path))
        self.assertEqual(code, 0)
        self.assertIn("collision_free: true", out)
        self.assertNotIn("witness", out)

    def test_matrix_checks_and_json(self):
        path = write_signal(self.dir / "eye.bin", Signal(np.eye(4)))
        code, out, _ = run_cli(
            "diagnose", "--coherence", "--rip", "2", "--matrix", str(path), "--out", str(self.dir / "diag")
        )
        self.assertEqual(code, 0)
        self.assertIn("coherence: 0.0", out)
        results = json.loads((self.dir / "diag" / "diagnostics.json").read_text())
        self.assertAlmostEqual(results["rip_delta"], 0.0)

    def test_complement_property(self):
        path = write_signal(self.dir / "frame.bin", Signal(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])))
        code, out, _ = run_cli("diagnose", "--complement", "--vectors", str(path))
        self.assertEqual(code, 0)
        self.assertIn("complement_property: true", out)

    def test_missing_input(self):
        self.assertEqual(run_cli("diagnose", "--coherence")[0], 1)
        self.assertEqual(run_cli("diagnose")[0], 1)


if __name__ == "__main__":
    unittest.main()
