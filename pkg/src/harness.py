"""
Monte Carlo orchestration of CSMD experiments.

An experiment runs every (T, replication) pair of its configuration, each
on its own random stream, and aggregates the final gaps per horizon. The
result set is sorted by (T, replication) before any aggregation so that the
outputs do not depend on the number of workers.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats as scistats

from src.config import ExperimentConfig, ScheduleSpec
from src.engine import (RunConfig, RunRecord, expected_bound, hp_bound, initial_distance,
                        run_csmd, subweibull_hp_bound)
from src.errors import (AssumptionMismatch, ConfigError, CsmdError, InsufficientReplications,
                        NonPositiveGap)
from src.kinds import Assumption, BoundKind, MirrorKind, Rule, Verdict
from src.noise import NoiseModel, RngStream, certifies
from src.problems import ProblemInstance, get_problem
from src.schedules import (HEAVY_RULES, SUBWEIBULL_RULES, Schedule, analysis_sequences,
                           recommended_eta)
from src.stats import (RateFit, fit_exponential_rate, fit_rate, median_of_means,
                       numerical_floor, standard_error, trimmed_mean)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["experiment", "T", "replication", "seed", "t", "eta", "gap", "gap_final", "error"]
FLOAT_FORMAT = "%.17g"


def build_schedule(spec: ScheduleSpec, problem: ProblemInstance, noise: NoiseModel,
                   T: int, D: float) -> Schedule:
    """
    Bind schedule settings to a problem, a noise model and a horizon.

    "auto" entries take the theory-driven tuning; an automatic constant step
    is capped at 1 / (2L v mu_f).

    Raises:
        CsmdError: If a needed constant is missing or a rule constraint fails
    """
    rule = spec.rule
    p = None
    if rule in HEAVY_RULES or rule in SUBWEIBULL_RULES:
        p = noise.p
        if p is None and problem.mirror.kind == MirrorKind.P_UNIFORM:
            p = problem.mirror.p
    eta, eta_star = float("inf"), float("inf")
    if spec.eta == "auto" or spec.eta_star == "auto":
        eta, eta_star = recommended_eta(rule, D, problem.L, problem.M, noise.sigma, T,
                                        spec.delta, p, spec.multiplier)
    if spec.eta != "auto":
        eta = float(spec.eta)
    if spec.eta_star != "auto":
        eta_star = float(spec.eta_star)
    if rule == Rule.CONSTANT and spec.eta == "auto":
        top = max(2.0 * problem.L, problem.mu_f)
        eta = min(eta, 1.0 / top) if top > 0 else eta
    return Schedule(rule, eta, eta_star, problem.L, problem.mu_f, problem.mu_h,
                    p if rule in HEAVY_RULES else None, horizon=T)


@dataclass(frozen=True, eq=False)
class _Task:
    T: int
    replication: int
    run: RunConfig


@dataclass(frozen=True, eq=False)
class RunOutcome:
    """
    One (T, replication) cell of an experiment.

    Attributes:
        T: Horizon
        replication: Replication index
        seed: Stream id the run drew from
        record: Run record, None if the run failed
        error: Error message of a failed run
    """

    T: int
    replication: int
    seed: int
    record: Optional[RunRecord]
    error: Optional[str] = None


def _execute(task: _Task) -> RunOutcome:
    seed = task.run.rng.stream_id
    try:
        record = run_csmd(task.run)
    except CsmdError as err:
        logger.warning("run T=%d r=%d failed: %s", task.T, task.replication, err)
        return RunOutcome(task.T, task.replication, seed, None, f"{type(err).__name__}: {err}")
    return RunOutcome(task.T, task.replication, seed, record)


@dataclass(frozen=True)
class QuantileReport:
    """
    Empirical (1 - delta)-quantiles of the final gap and their growth in delta.

    Attributes:
        quantiles: delta -> q_delta
        regime: "convex" (fit against sqrt(ln 1/delta)) or "strongly_convex" (ln 1/delta)
        slope: Slope of q_delta against the regime's delta transform
        intercept: Intercept of that fit
        r_squared: Coefficient of determination of that fit
        ratio: q_0.01 / q_0.1 when both are on the grid
    """

    quantiles: dict[float, float]
    regime: str
    slope: float
    intercept: float
    r_squared: float
    ratio: Optional[float]


def quantile_scaling(gaps: Sequence[float], delta_grid: Sequence[float],
                     regime: str = "convex") -> QuantileReport:
    """
    Quantiles of a replication sample and their fit against ln(1/delta).

    Args:
        gaps: Final gaps of the replications at one horizon
        delta_grid: Failure probabilities
        regime: "convex" or "strongly_convex"

    Returns:
        The report

    Raises:
        InsufficientReplications: If len(gaps) < 10 / min(delta)
    """
    if regime not in ("convex", "strongly_convex"):
        raise ValueError("regime must be 'convex' or 'strongly_convex'")
    sample = np.asarray(gaps, dtype=float)
    deltas = sorted(set(float(d) for d in delta_grid), reverse=True)
    if not deltas:
        raise ValueError("Quantile scaling needs at least one delta")
    if sample.size < 10.0 / deltas[-1]:
        raise InsufficientReplications(
            f"{sample.size} replications cannot resolve delta = {deltas[-1]}")
    quantiles = {d: float(np.quantile(sample, 1.0 - d)) for d in deltas}
    slope = intercept = float("nan")
    r_squared = float("nan")
    if len(deltas) >= 2:
        logs = np.log(1.0 / np.array(deltas))
        x = np.sqrt(logs) if regime == "convex" else logs
        result = scistats.linregress(x, [quantiles[d] for d in deltas])
        slope, intercept = float(result.slope), float(result.intercept)
        r_squared = float(result.rvalue ** 2)
    ratio = None
    if 0.01 in quantiles and 0.1 in quantiles:
        low, high = quantiles[0.1], quantiles[0.01]
        ratio = 1.0 if high == low else (high / low if low > 0 else float("inf"))
    return QuantileReport(quantiles, regime, slope, intercept, r_squared, ratio)


@dataclass(frozen=True)
class DominanceLine:
    """
    One PASS/FAIL comparison of an empirical statistic with a bound.

    Attributes:
        label: What was compared, e.g. "mean-2se" or "q(0.01)"
        statistic: Empirical value
        bound: Theoretical right-hand side
        verdict: PASS iff statistic <= bound
    """

    label: str
    statistic: float
    bound: float
    verdict: Verdict


@dataclass(frozen=True)
class DominanceReport:
    """
    Bound dominance at one horizon.

    Attributes:
        kind: Which bound was checked
        T: Horizon
        lines: Individual comparisons
    """

    kind: BoundKind
    T: int
    lines: tuple[DominanceLine, ...]

    @property
    def passed(self) -> bool:
        """Whether every comparison passed."""
        return all(line.verdict == Verdict.PASS for line in self.lines)


_REQUIRED = {
    BoundKind.EXPECTED: Assumption.BOUNDED_VARIANCE,
    BoundKind.HP: Assumption.SUB_GAUSSIAN,
    BoundKind.SUBWEIBULL: Assumption.SUB_WEIBULL,
}


def require_assumption(kind: BoundKind, noise: NoiseModel) -> None:
    """
    Check that the noise model certifies what a bound needs.

    Raises:
        AssumptionMismatch: If the noise does not certify the bound's assumption
    """
    if kind == BoundKind.NONE:
        return
    required = _REQUIRED[kind]
    if not certifies(noise, required, noise.p if kind == BoundKind.SUBWEIBULL else None):
        raise AssumptionMismatch(
            f"{noise.generator.value} noise does not certify {required.value} "
            f"needed by the {kind.value} bound")


def bound_dominance_report(gaps: Sequence[float], bounds: Mapping[Optional[float], float],
                           kind: BoundKind, noise: NoiseModel, T: int = 0) -> DominanceReport:
    """
    Compare final gaps with an expectation or high-probability bound.

    The expectation bound passes iff mean - 2 se <= bound; the high-probability
    bounds pass iff the empirical (1 - delta)-quantile <= bound for every delta.

    Args:
        gaps: Final gaps of the replications
        bounds: None -> bound for the expectation check, delta -> bound otherwise
        kind: Which bound the values come from
        noise: Noise model of the experiment
        T: Horizon, for the report

    Returns:
        The report

    Raises:
        AssumptionMismatch: If the noise does not certify what the bound needs
    """
    if kind == BoundKind.NONE:
        raise ValueError("No bound to compare with")
    require_assumption(kind, noise)
    sample = np.asarray(gaps, dtype=float)
    lines = []
    if kind == BoundKind.EXPECTED:
        statistic = float(np.mean(sample)) - 2.0 * standard_error(sample)
        bound = bounds[None]
        lines.append(DominanceLine("mean-2se", statistic, bound,
                                   Verdict.PASS if statistic <= bound else Verdict.FAIL))
    else:
        for delta in sorted((d for d in bounds if d is not None), reverse=True):
            statistic = float(np.quantile(sample, 1.0 - delta))
            bound = bounds[delta]
            lines.append(DominanceLine(f"q({delta:g})", statistic, bound,
                                       Verdict.PASS if statistic <= bound else Verdict.FAIL))
    return DominanceReport(kind, T, tuple(lines))


@dataclass(frozen=True)
class HorizonSummary:
    """
    Aggregates of the final gap at one horizon.

    Attributes:
        T: Horizon
        runs: Successful replications
        failures: Failed replications
        mean: Sample mean
        se: Standard error of the mean
        median_of_means: Median of 10 block means
        trimmed_mean: 1%-trimmed mean
        quantiles: delta -> empirical (1 - delta)-quantile
        bounds: Bound values, keyed "expected" or "hp(delta)"
    """

    T: int
    runs: int
    failures: int
    mean: float
    se: float
    median_of_means: float
    trimmed_mean: float
    quantiles: dict[float, float] = field(default_factory=dict)
    bounds: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """
    Everything an experiment produced.

    Attributes:
        config: The configuration that was run
        table: Long-format results, one row per checkpoint
        horizons: Per-T aggregates
        fit: Rate fit, when requested and possible
        fit_error: Why the fit could not be computed
        dominance: Bound dominance reports, when a bound was requested
        quantile_reports: Per-T quantile scaling, when a delta grid was given
        outcomes: Raw per-run outcomes sorted by (T, replication)
    """

    config: ExperimentConfig
    table: pd.DataFrame
    horizons: tuple[HorizonSummary, ...]
    fit: Optional[RateFit]
    fit_error: Optional[str]
    dominance: tuple[DominanceReport, ...]
    quantile_reports: dict[int, QuantileReport]
    outcomes: tuple[RunOutcome, ...]

    @property
    def passed(self) -> bool:
        """Whether every dominance report passed."""
        return all(report.passed for report in self.dominance)

    def final_gaps(self, T: int) -> np.ndarray:
        """Final gaps of the successful runs at horizon T, in replication order."""
        return np.array([o.record.gap_final for o in self.outcomes
                         if o.T == T and o.record is not None])


def _start_point(config: ExperimentConfig, problem: ProblemInstance) -> np.ndarray:
    if config.start == "default":
        return problem.default_start.copy()
    return np.asarray(config.start, dtype=float)


def _tasks(config: ExperimentConfig, problem: ProblemInstance,
           start: np.ndarray, D: float) -> list[_Task]:
    tasks = []
    for T in config.T_grid:
        try:
            schedule = build_schedule(config.schedule, problem, config.noise, T, D)
        except CsmdError as err:
            raise ConfigError(f"Schedule for T={T}: {err}") from err
        checkpoints = config.checkpoints_for(T)
        for r in range(config.replications):
            rng = RngStream.derive(config.base_seed, config.index, r)
            run = RunConfig(problem, config.noise, schedule, start, T, checkpoints,
                            False, rng)
            tasks.append(_Task(T, r, run))
    return tasks


def _execute_all(tasks: list[_Task], jobs: int) -> list[RunOutcome]:
    if jobs > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            outcomes = list(executor.map(_execute, tasks, chunksize=chunk))
    else:
        outcomes = [_execute(task) for task in tasks]
    return sorted(outcomes, key=lambda o: (o.T, o.replication))


def _table(config: ExperimentConfig, outcomes: Sequence[RunOutcome]) -> pd.DataFrame:
    rows = []
    for o in outcomes:
        if o.record is None:
            rows.append((config.experiment, o.T, o.replication, o.seed, None, None, None,
                         None, o.error))
            continue
        final = o.record.gap_final
        for c in o.record.checkpoints:
            rows.append((config.experiment, o.T, o.replication, o.seed, c.t, c.eta, c.gap,
                         final, ""))
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS)
    return frame.astype({"T": "int64", "replication": "int64", "seed": "int64",
                         "t": "Int64"})


def _bounds(config: ExperimentConfig, problem: ProblemInstance, T: int,
            D: float) -> dict[Optional[float], float]:
    if config.bound == BoundKind.NONE:
        return {}
    schedule = build_schedule(config.schedule, problem, config.noise, T, D)
    seq = analysis_sequences(schedule, problem.mu_f, problem.mu_h, T)
    sigma = config.noise.sigma
    if config.bound == BoundKind.EXPECTED:
        return {None: expected_bound(seq, D, problem.M, sigma, problem.mu_f)}
    if config.bound == BoundKind.HP:
        return {d: hp_bound(seq, D, problem.M, sigma, problem.mu_f, None, d)
                for d in config.delta_grid}
    assert config.noise.p is not None
    return {d: subweibull_hp_bound(seq, D, problem.M, sigma, problem.mu_f, d, config.noise.p)
            for d in config.delta_grid}


def _summaries(config: ExperimentConfig, outcomes: Sequence[RunOutcome],
               bounds: Mapping[int, Mapping[Optional[float], float]]) -> tuple[HorizonSummary, ...]:
    out = []
    for T in config.T_grid:
        cell = [o for o in outcomes if o.T == T]
        gaps = np.array([o.record.gap_final for o in cell if o.record is not None])
        failures = sum(1 for o in cell if o.record is None)
        if gaps.size == 0:
            nan = float("nan")
            out.append(HorizonSummary(T, 0, failures, nan, nan, nan, nan))
            continue
        quantiles = {d: float(np.quantile(gaps, 1.0 - d)) for d in config.delta_grid}
        labelled = {("expected" if d is None else f"{config.bound.value}({d:g})"): v
                    for d, v in bounds.get(T, {}).items()}
        out.append(HorizonSummary(T, int(gaps.size), failures, float(np.mean(gaps)),
                                  standard_error(gaps), median_of_means(gaps),
                                  trimmed_mean(gaps), quantiles, labelled))
    return tuple(out)


def _fit(config: ExperimentConfig, problem: ProblemInstance,
         horizons: Sequence[HorizonSummary]) -> tuple[Optional[RateFit], Optional[str]]:
    if config.fit == "none":
        return None, None
    use_mom = config.estimator == "median_of_means"
    points = [(h.T, h.median_of_means if use_mom else h.mean) for h in horizons if h.runs]
    floor = numerical_floor(problem.F_star)
    try:
        if config.fit == "exponential":
            return fit_exponential_rate(points, floor=floor), None
        return fit_rate(points, [h.se for h in horizons if h.runs], floor=floor), None
    except (NonPositiveGap, ValueError) as err:
        logger.warning("%s: rate fit failed: %s", config.experiment, err)
        return None, str(err)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """
    Execute every (T, replication) run of an experiment and aggregate.

    Failed runs are recorded with their error and excluded from aggregates.

    Args:
        config: Validated configuration

    Returns:
        The experiment result

    Raises:
        ConfigError: If the schedule cannot be bound to the problem
        AssumptionMismatch: If the requested bound needs a stronger noise assumption
    """
    problem = get_problem(config.problem)
    start = _start_point(config, problem)
    D = initial_distance(problem, start)
    logger.info("experiment %s: %s, %d horizons x %d replications, %d jobs",
                config.experiment, problem.name, len(config.T_grid), config.replications,
                config.jobs)
    require_assumption(config.bound, config.noise)
    bounds = {T: _bounds(config, problem, T, D) for T in config.T_grid}
    outcomes = _execute_all(_tasks(config, problem, start, D), config.jobs)
    horizons = _summaries(config, outcomes, bounds)
    fit, fit_error = _fit(config, problem, horizons)
    dominance: list[DominanceReport] = []
    quantile_reports: dict[int, QuantileReport] = {}
    regime = "strongly_convex" if problem.mu_f > 0 or problem.mu_h > 0 else "convex"
    for h in horizons:
        gaps = np.array([o.record.gap_final for o in outcomes
                         if o.T == h.T and o.record is not None])
        if gaps.size == 0:
            continue
        if config.bound != BoundKind.NONE:
            dominance.append(bound_dominance_report(gaps, bounds[h.T], config.bound,
                                                    config.noise, h.T))
        if config.delta_grid and gaps.size >= 10.0 / min(config.delta_grid):
            quantile_reports[h.T] = quantile_scaling(gaps, config.delta_grid, regime)
    result = ExperimentResult(config, _table(config, outcomes), horizons, fit, fit_error,
                              tuple(dominance), quantile_reports, tuple(outcomes))
    logger.info("experiment %s finished: %d runs, %d failed", config.experiment,
                len(outcomes), sum(1 for o in outcomes if o.record is None))
    return result


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "value") and not isinstance(value, (int, float, str)):
        return value.value
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else str(number)
    if isinstance(value, np.integer):
        return int(value)
    return value


def summarize(result: ExperimentResult) -> dict[str, Any]:
    """JSON-ready summary of an experiment."""
    config = result.config
    summary: dict[str, Any] = {
        "experiment": config.experiment,
        "problem": config.problem,
        "noise": {"generator": config.noise.generator, "sigma": config.noise.sigma,
                  "p": config.noise.p, "assumption": config.noise.assumption},
        "schedule": asdict(config.schedule),
        "base_seed": config.base_seed,
        "replications": config.replications,
        "horizons": [asdict(h) for h in result.horizons],
    }
    if result.fit is not None:
        summary["fit"] = asdict(result.fit)
    if result.fit_error is not None:
        summary["fit_error"] = result.fit_error
    if result.dominance:
        summary["dominance"] = [
            {"kind": r.kind, "T": r.T, "passed": r.passed,
             "lines": [asdict(line) for line in r.lines]} for r in result.dominance]
    if result.quantile_reports:
        summary["quantiles"] = {T: asdict(r) for T, r in result.quantile_reports.items()}
    return _jsonable(summary)


def table_csv(table: pd.DataFrame) -> str:
    """Serialize a results table exactly as results.csv stores it."""
    return table.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_outputs(results: Sequence[ExperimentResult], out_dir: str | Path) -> tuple[Path, Path]:
    """
    Write results.csv (all experiments stacked) and summary.json.

    Returns:
        Paths of the two files
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    table = pd.concat([r.table for r in results], ignore_index=True)
    csv_path = directory / "results.csv"
    csv_path.write_text(table_csv(table), encoding="utf-8")
    json_path = directory / "summary.json"
    payload = [summarize(r) for r in results]
    json_path.write_text(json.dumps(payload if len(payload) != 1 else payload[0],
                                    indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("wrote %s and %s", csv_path, json_path)
    return csv_path, json_path
