"""
Unit tests for the command-line entry point.
"""

import inspect
import io
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from main import EXIT_CONFIG, build_parser, main


class TestParser(unittest.TestCase):
    """Test suite for the argument parser."""

    def test_global_flags(self):
        """Test that global flags precede the subcommand."""
        args = build_parser().parse_args(
            ["--seed", "3", "--jobs", "2", "accept", "--only", "1", "11"])
        self.assertEqual((args.seed, args.jobs, args.only), (3, 2, [1, 11]))

    def test_unknown_rule(self):
        """Test that argparse rejects an unknown rule."""
        with patch("sys.stderr", new_callable=io.StringIO):
            with self.assertRaises(SystemExit):
                build_parser().parse_args(["dump-schedule", "nope", "--T", "3"])

    def test_docstring_sections(self):
        """Test that Args and Returns open their own paragraphs."""
        for function in (build_parser, main):
            doc = inspect.getdoc(function) or ""
            with self.subTest(function=function.__name__):
                self.assertIn("\n\nReturns:", doc)
        self.assertIn("\n\nArgs:", inspect.getdoc(main) or "")


class TestCommands(unittest.TestCase):
    """Test suite for the subcommands."""

    def test_dump_schedule_stdout(self):
        """Test the CSV written for a constant schedule."""
        with patch("sys.stdout", new_callable=io.StringIO) as out:
            code = main(["--log-level", "ERROR", "dump-schedule", "constant", "--T", "3",
                         "--eta", "0.5"])
        self.assertEqual(code, 0)
        lines = out.getvalue().strip().split("\n")
        self.assertEqual(lines[0], "t,eta,gamma,Gamma,v")
        self.assertEqual(len(lines), 5)
        self.assertTrue(lines[-1].endswith(",1"))

    def test_dump_schedule_file(self):
        """Test that --out-dir writes schedule_<rule>.csv."""
        with tempfile.TemporaryDirectory() as tmp:
            code = main(["--log-level", "ERROR", "--out-dir", tmp, "dump-schedule", "zamani",
                         "--T", "10"])
            self.assertEqual(code, 0)
            self.assertTrue((Path(tmp) / "schedule_zamani.csv").exists())

    def test_dump_schedule_bad_constants(self):
        """Test that a violated rule precondition exits with the config code."""
        code = main(["--log-level", "CRITICAL", "dump-schedule", "strc_f_known_piecewise",
                     "--T", "4", "--eta", "0.5", "--mu-f", "1"])
        self.assertEqual(code, EXIT_CONFIG)

    def test_missing_config(self):
        """Test that an unreadable config file exits with 2."""
        code = main(["--log-level", "CRITICAL", "run", "/nonexistent/experiment.yaml"])
        self.assertEqual(code, EXIT_CONFIG)

    def test_run(self):
        """Test a tiny experiment end to end."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "tiny.yaml"
            path.write_text("experiment: tiny\nproblem: quad_d2\n"
                            "noise: {generator: gaussian, sigma: 0.1}\n"
                            "schedule: {rule: constant, eta: 0.1}\n"
                            "T_grid: [4, 8]\nreplications: 3\n", encoding="utf-8")
            with patch("sys.stdout", new_callable=io.StringIO):
                code = main(["--log-level", "ERROR", "--out-dir", str(Path(tmp) / "out"),
                             "run", str(path)])
            self.assertEqual(code, 0)
            self.assertTrue((Path(tmp) / "out" / "results.csv").exists())

    def test_validate_noise(self):
        """Test that sphere noise validates."""
        with patch("sys.stdout", new_callable=io.StringIO) as out:
            code = main(["--log-level", "ERROR", "validate-noise", "sphere_bounded",
                         "--samples", "10000"])
        self.assertEqual(code, 0)
        self.assertTrue(out.getvalue().strip().endswith("PASS"))

    def test_validate_noise_bad_model(self):
        """Test that a Pareto model without p exits with 2."""
        code = main(["--log-level", "CRITICAL", "validate-noise", "symmetric_pareto"])
        self.assertEqual(code, EXIT_CONFIG)

    def test_accept_only(self):
        """Test the accept subcommand on a single cheap criterion."""
        with tempfile.TemporaryDirectory() as tmp:
            with patch("sys.stdout", new_callable=io.StringIO) as out:
                code = main(["--log-level", "ERROR", "--out-dir", tmp, "accept", "--only", "11"])
            self.assertEqual(code, 0)
            self.assertIn("CRITERION 11 sequence_identities: PASS", out.getvalue())


if __name__ == "__main__":
    unittest.main()
