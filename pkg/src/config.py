"""
Experiment configuration: YAML loading and validation.

A configuration file is a YAML mapping; every key is documented in the
README. Unknown keys, wrong types and inconsistent combinations raise
ConfigError before any run starts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml

from src.errors import ConfigError
from src.kinds import Assumption, BoundKind, NoiseGenerator, Rule
from src.noise import NoiseModel
from src.problems import get_problem

logger = logging.getLogger(__name__)

MIN_MEAN_REPLICATIONS = 30
MIN_FIT_POINTS = 4
ESTIMATORS = ("mean", "median_of_means")
FITS = ("none", "power", "exponential")

_TOP_KEYS = {
    "experiment", "index", "problem", "noise", "schedule", "T_grid", "replications",
    "delta_grid", "checkpoints", "start", "base_seed", "jobs", "estimator", "bound",
    "fit", "output",
}
_NOISE_KEYS = {"generator", "sigma", "p", "assumption"}
_SCHEDULE_KEYS = {"rule", "eta", "eta_star", "multiplier", "delta"}
_OUTPUT_KEYS = {"dir"}

Auto = Union[str, float]


@dataclass(frozen=True)
class ScheduleSpec:
    """
    Step-size settings before they are bound to a problem and a horizon.

    Attributes:
        rule: Step-size rule
        eta: "auto" for the theory-driven tuning or a number
        eta_star: "auto" or a number (heavy-tailed rules)
        multiplier: Factor applied to the automatic tunings
        delta: Failure probability used by high-probability tunings
    """

    rule: Rule
    eta: Auto = "auto"
    eta_star: Auto = "auto"
    multiplier: float = 1.0
    delta: Optional[float] = None


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A validated experiment.

    Attributes:
        experiment: Experiment name, used in output rows
        index: Experiment index e in the stream id e * 10^6 + r
        problem: Problem registry id
        noise: Noise model
        schedule: Schedule settings
        T_grid: Strictly increasing horizons
        replications: Replications per horizon
        delta_grid: Failure probabilities of the quantile and hp reports
        checkpoints: "final", ("every", k) or an explicit tuple of iterations
        start: "default" or an explicit starting point
        base_seed: Seed shared by every stream of the experiment
        jobs: Worker processes
        estimator: Gap estimator of the rate fit
        bound: Right-hand side the final gaps are compared with
        fit: Rate fit to perform
        output_dir: Directory receiving results.csv and summary.json
    """

    experiment: str
    problem: str
    noise: NoiseModel
    schedule: ScheduleSpec
    T_grid: tuple[int, ...]
    replications: int
    index: int = 0
    delta_grid: tuple[float, ...] = ()
    checkpoints: Any = "final"
    start: Any = "default"
    base_seed: int = 0
    jobs: int = 1
    estimator: str = "mean"
    bound: BoundKind = BoundKind.NONE
    fit: str = "none"
    output_dir: str = "results"

    def checkpoints_for(self, T: int) -> tuple[int, ...]:
        """Iterations recorded for horizon T."""
        if self.checkpoints == "final":
            return (T,)
        if isinstance(self.checkpoints, tuple) and self.checkpoints[:1] == ("every",):
            step = self.checkpoints[1]
            return tuple(range(step, T + 1, step)) + ((T,) if T % step else ())
        return tuple(sorted({t for t in self.checkpoints if t <= T} | {T}))

    def with_overrides(self, seed: Optional[int] = None, jobs: Optional[int] = None,
                       out_dir: Optional[str] = None) -> ExperimentConfig:
        """Apply command-line overrides, keeping unset ones."""
        changes: dict[str, Any] = {}
        if seed is not None:
            changes["base_seed"] = seed
        if jobs is not None:
            changes["jobs"] = jobs
        if out_dir is not None:
            changes["output_dir"] = out_dir
        return validate(replace(self, **changes)) if changes else self


def _require(mapping: Mapping, key: str, where: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"Missing key {key!r} in {where}")
    return mapping[key]


def _reject_unknown(mapping: Mapping, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"Unknown keys in {where}: {', '.join(sorted(unknown))}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _enum(kind: Any, value: Any, where: str) -> Any:
    try:
        return kind(value)
    except ValueError as err:
        choices = ", ".join(member.value for member in kind)
        raise ConfigError(f"{where} must be one of {choices}, got {value!r}") from err


def _auto(value: Any, where: str) -> Auto:
    if value == "auto":
        return "auto"
    number = _number(value, where)
    if not number > 0:
        raise ConfigError(f"{where} must be 'auto' or a positive number")
    return number


def _parse_noise(raw: Any) -> NoiseModel:
    if not isinstance(raw, Mapping):
        raise ConfigError("noise must be a mapping")
    _reject_unknown(raw, _NOISE_KEYS, "noise")
    generator = _enum(NoiseGenerator, _require(raw, "generator", "noise"), "noise.generator")
    sigma = _number(_require(raw, "sigma", "noise"), "noise.sigma")
    p = _number(raw["p"], "noise.p") if raw.get("p") is not None else None
    assumption = None
    if raw.get("assumption") is not None:
        assumption = _enum(Assumption, str(raw["assumption"]), "noise.assumption")
    try:
        return NoiseModel(generator, sigma, p, assumption)
    except ValueError as err:
        raise ConfigError(f"noise: {err}") from err


def _parse_schedule(raw: Any) -> ScheduleSpec:
    if not isinstance(raw, Mapping):
        raise ConfigError("schedule must be a mapping")
    _reject_unknown(raw, _SCHEDULE_KEYS, "schedule")
    rule = _enum(Rule, _require(raw, "rule", "schedule"), "schedule.rule")
    multiplier = _number(raw.get("multiplier", 1.0), "schedule.multiplier")
    if not multiplier > 0:
        raise ConfigError("schedule.multiplier must be positive")
    delta = raw.get("delta")
    if delta is not None:
        delta = _number(delta, "schedule.delta")
        if not 0.0 < delta < 1.0:
            raise ConfigError("schedule.delta must lie in (0, 1)")
    return ScheduleSpec(rule, _auto(raw.get("eta", "auto"), "schedule.eta"),
                        _auto(raw.get("eta_star", "auto"), "schedule.eta_star"),
                        multiplier, delta)


def _parse_grid(raw: Any) -> tuple[int, ...]:
    if isinstance(raw, Mapping):
        _reject_unknown(raw, {"geometric"}, "T_grid")
        bounds = _require(raw, "geometric", "T_grid")
        if not isinstance(bounds, list) or len(bounds) != 2:
            raise ConfigError("T_grid.geometric must be [k_lo, k_hi]")
        lo, hi = (_integer(b, "T_grid.geometric") for b in bounds)
        return tuple(2 ** k for k in range(lo, hi + 1))
    if not isinstance(raw, list) or not raw:
        raise ConfigError("T_grid must be a non-empty list or {geometric: [k_lo, k_hi]}")
    return tuple(_integer(t, "T_grid entry") for t in raw)


def _parse_checkpoints(raw: Any) -> Any:
    if raw == "final":
        return "final"
    if isinstance(raw, Mapping):
        _reject_unknown(raw, {"every"}, "checkpoints")
        step = _integer(_require(raw, "every", "checkpoints"), "checkpoints.every")
        if step < 1:
            raise ConfigError("checkpoints.every must be positive")
        return ("every", step)
    if isinstance(raw, list) and raw:
        points = sorted({_integer(t, "checkpoint") for t in raw})
        if points[0] < 1:
            raise ConfigError("Checkpoints must be positive")
        return tuple(points)
    raise ConfigError("checkpoints must be 'final', {every: k} or a list of iterations")


def parse_config(raw: Any) -> ExperimentConfig:
    """
    Turn a decoded YAML mapping into a validated ExperimentConfig.

    Args:
        raw: Result of yaml.safe_load

    Returns:
        The configuration

    Raises:
        ConfigError: On any schema or consistency violation
    """
    if not isinstance(raw, Mapping):
        raise ConfigError("A configuration must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, "configuration")
    output = raw.get("output", {}) or {}
    if not isinstance(output, Mapping):
        raise ConfigError("output must be a mapping")
    _reject_unknown(output, _OUTPUT_KEYS, "output")
    start = raw.get("start", "default")
    if start != "default":
        if not isinstance(start, list):
            raise ConfigError("start must be 'default' or a list of numbers")
        start = tuple(_number(v, "start entry") for v in start)
    config = ExperimentConfig(
        experiment=str(_require(raw, "experiment", "configuration")),
        problem=str(_require(raw, "problem", "configuration")),
        noise=_parse_noise(_require(raw, "noise", "configuration")),
        schedule=_parse_schedule(_require(raw, "schedule", "configuration")),
        T_grid=_parse_grid(_require(raw, "T_grid", "configuration")),
        replications=_integer(_require(raw, "replications", "configuration"), "replications"),
        index=_integer(raw.get("index", 0), "index"),
        delta_grid=tuple(_number(d, "delta_grid entry") for d in raw.get("delta_grid", []) or []),
        checkpoints=_parse_checkpoints(raw.get("checkpoints", "final")),
        start=start,
        base_seed=_integer(raw.get("base_seed", 0), "base_seed"),
        jobs=_integer(raw.get("jobs", 1), "jobs"),
        estimator=str(raw.get("estimator", "mean")),
        bound=_enum(BoundKind, raw.get("bound", "none"), "bound"),
        fit=str(raw.get("fit", "none")),
        output_dir=str(output.get("dir", "results")),
    )
    return validate(config)


def validate(config: ExperimentConfig) -> ExperimentConfig:
    """
    Check the cross-field invariants of a configuration.

    Raises:
        ConfigError: On the first violated invariant
    """
    grid = config.T_grid
    if any(t < 2 for t in grid):
        raise ConfigError("Every horizon must be at least 2")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("T_grid must be strictly increasing")
    if config.replications < 1:
        raise ConfigError("replications must be positive")
    if config.jobs < 1:
        raise ConfigError("jobs must be positive")
    if config.base_seed < 0 or config.index < 0:
        raise ConfigError("base_seed and index must be non-negative")
    if config.estimator not in ESTIMATORS:
        raise ConfigError(f"estimator must be one of {', '.join(ESTIMATORS)}")
    if config.fit not in FITS:
        raise ConfigError(f"fit must be one of {', '.join(FITS)}")
    if config.fit != "none" and len(grid) < MIN_FIT_POINTS:
        raise ConfigError(f"Rate fits need at least {MIN_FIT_POINTS} horizons")
    if any(not 0.0 < d < 1.0 for d in config.delta_grid):
        raise ConfigError("delta_grid entries must lie in (0, 1)")
    if config.bound == BoundKind.EXPECTED and config.replications < MIN_MEAN_REPLICATIONS:
        raise ConfigError(f"Mean comparisons need at least {MIN_MEAN_REPLICATIONS} replications")
    if config.bound in (BoundKind.HP, BoundKind.SUBWEIBULL):
        if not config.delta_grid:
            raise ConfigError("High-probability bounds need a delta_grid")
        if config.replications < 10.0 / min(config.delta_grid):
            raise ConfigError("Quantile reports need at least 10 / min(delta) replications")
    if config.bound == BoundKind.SUBWEIBULL and config.noise.p is None:
        raise ConfigError("The sub-Weibull bound needs a noise tail exponent p")
    try:
        problem = get_problem(config.problem)
    except (KeyError, ValueError) as err:
        raise ConfigError(f"problem: {err}") from err
    if config.start != "default" and len(config.start) != problem.dimension:
        raise ConfigError("start has the wrong dimension")
    return config


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Read and validate a YAML configuration file.

    Raises:
        ConfigError: If the file is unreadable, not YAML, or invalid
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except OSError as err:
        raise ConfigError(f"Cannot read {path}: {err}") from err
    except yaml.YAMLError as err:
        raise ConfigError(f"{path} is not valid YAML: {err}") from err
    config = parse_config(raw)
    logger.debug("loaded experiment %s from %s", config.experiment, path)
    return config
