"""
Unit tests for the config module.
"""

import tempfile
import unittest
from pathlib import Path

from src.config import load_config, parse_config
from src.errors import ConfigError
from src.kinds import Assumption, BoundKind, NoiseGenerator, Rule

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def minimal(**changes):
    """A valid raw configuration with the given keys replaced."""
    raw = {
        "experiment": "unit",
        "problem": "quad_d3",
        "noise": {"generator": "gaussian", "sigma": 1.0},
        "schedule": {"rule": "convex_anytime"},
        "T_grid": [4, 8],
        "replications": 2,
    }
    raw.update(changes)
    return raw


class TestParseConfig(unittest.TestCase):
    """Test suite for parse_config."""

    def test_defaults(self):
        """Test that optional keys take their documented defaults."""
        config = parse_config(minimal())
        self.assertEqual(config.T_grid, (4, 8))
        self.assertEqual(config.noise.generator, NoiseGenerator.GAUSSIAN)
        self.assertEqual(config.schedule.rule, Rule.CONVEX_ANYTIME)
        self.assertEqual(config.schedule.eta, "auto")
        self.assertEqual(config.bound, BoundKind.NONE)
        self.assertEqual((config.base_seed, config.jobs, config.index), (0, 1, 0))
        self.assertEqual(config.output_dir, "results")

    def test_geometric_grid(self):
        """Test that {geometric: [6, 8]} expands to 64, 128, 256."""
        config = parse_config(minimal(T_grid={"geometric": [6, 8]}))
        self.assertEqual(config.T_grid, (64, 128, 256))

    def test_assumption_override(self):
        """Test that a weaker assumption may be declared."""
        config = parse_config(minimal(noise={"generator": "sphere_bounded", "sigma": 1.0,
                                             "assumption": "5A"}))
        self.assertEqual(config.noise.assumption, Assumption.BOUNDED_VARIANCE)

    def test_unknown_key(self):
        """Test that a misspelled key is rejected."""
        with self.assertRaises(ConfigError):
            parse_config(minimal(replicatons=3))
        with self.assertRaises(ConfigError):
            parse_config(minimal(schedule={"rule": "constant", "step": 0.1}))

    def test_missing_key(self):
        """Test that a required key cannot be omitted."""
        raw = minimal()
        del raw["problem"]
        with self.assertRaises(ConfigError):
            parse_config(raw)

    def test_bad_values(self):
        """Test a selection of rejected values."""
        cases = [
            minimal(T_grid=[8, 4]),
            minimal(T_grid=[1, 4]),
            minimal(replications=0),
            minimal(replications=2.5),
            minimal(noise={"generator": "laplace", "sigma": 1.0}),
            minimal(noise={"generator": "symmetric_pareto", "sigma": 1.0}),
            minimal(schedule={"rule": "constant", "eta": -1.0}),
            minimal(schedule={"rule": "constant", "delta": 1.5}),
            minimal(problem="nope_d3"),
            minimal(start=[0.0, 0.0]),
            minimal(fit="power"),
            minimal(estimator="median"),
            minimal(bound="expected"),
            minimal(bound="hp", replications=100),
            minimal(bound="hp", replications=100, delta_grid=[0.01]),
            minimal(delta_grid=[0.0]),
        ]
        for raw in cases:
            with self.subTest(raw=raw):
                with self.assertRaises(ConfigError):
                    parse_config(raw)

    def test_not_a_mapping(self):
        """Test that a YAML list is not a configuration."""
        with self.assertRaises(ConfigError):
            parse_config([1, 2])


class TestCheckpoints(unittest.TestCase):
    """Test suite for checkpoint expansion."""

    def test_final(self):
        """Test that only T is recorded by default."""
        self.assertEqual(parse_config(minimal()).checkpoints_for(8), (8,))

    def test_every(self):
        """Test every k plus T when k does not divide T."""
        config = parse_config(minimal(checkpoints={"every": 3}))
        self.assertEqual(config.checkpoints_for(8), (3, 6, 8))
        self.assertEqual(config.checkpoints_for(6), (3, 6))

    def test_explicit(self):
        """Test that explicit checkpoints beyond T are dropped."""
        config = parse_config(minimal(checkpoints=[2, 6, 1]))
        self.assertEqual(config.checkpoints_for(4), (1, 2, 4))


class TestOverridesAndFiles(unittest.TestCase):
    """Test suite for overrides and YAML loading."""

    def test_overrides(self):
        """Test that only the given overrides change."""
        config = parse_config(minimal()).with_overrides(seed=9, out_dir="elsewhere")
        self.assertEqual(config.base_seed, 9)
        self.assertEqual(config.jobs, 1)
        self.assertEqual(config.output_dir, "elsewhere")

    def test_invalid_override(self):
        """Test that overrides are validated."""
        with self.assertRaises(ConfigError):
            parse_config(minimal()).with_overrides(jobs=0)

    def test_load_file(self):
        """Test loading a YAML file from disk."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "c.yaml"
            path.write_text("experiment: file\nproblem: quad_d2\n"
                            "noise: {generator: gaussian, sigma: 0.5}\n"
                            "schedule: {rule: constant, eta: 0.1}\n"
                            "T_grid: [2, 4]\nreplications: 3\n", encoding="utf-8")
            config = load_config(path)
        self.assertEqual(config.experiment, "file")
        self.assertEqual(config.schedule.eta, 0.1)

    def test_invalid_yaml(self):
        """Test that a syntax error becomes a ConfigError."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.yaml"
            path.write_text("experiment: [unclosed\n", encoding="utf-8")
            with self.assertRaises(ConfigError):
                load_config(path)

    def test_missing_file(self):
        """Test that an unreadable path becomes a ConfigError."""
        with self.assertRaises(ConfigError):
            load_config("/nonexistent/config.yaml")

    def test_shipped_configs_are_valid(self):
        """Test that every example configuration parses."""
        paths = sorted(CONFIG_DIR.glob("*.yaml"))
        self.assertGreater(len(paths), 0)
        for path in paths:
            with self.subTest(path=path.name):
                load_config(path)


if __name__ == "__main__":
    unittest.main()
