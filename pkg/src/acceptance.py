"""
The acceptance matrix: twelve named checks with machine-readable verdicts.

Each criterion returns a CriterionResult whose line() reads
"CRITERION <n> <name>: PASS|FAIL <detail>". run_acceptance executes them in
order, writes results.csv, summary.json and acceptance.txt, and the CLI exits
nonzero iff some line says FAIL.
"""

from __future__ import annotations

import hashlib
import logging
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from src.config import parse_config
from src.engine import RunConfig, run_csmd, z_diagnostics
from src.errors import CsmdError
from src.geometry import Domain, MirrorMap, ProxProblem, prox_objective, reference_prox, solve_prox
from src.harness import ExperimentResult, run_experiment, table_csv, write_outputs
from src.kinds import (DomainKind, MirrorKind, NoiseGenerator, RegularizerKind, Rule,
                       Verdict)
from src.noise import NoiseModel, RngStream, validate_noise
from src.problems import CompositeRegularizer, get_problem
from src.schedules import Schedule, analysis_sequences

logger = logging.getLogger(__name__)

PROX_TOL = 1e-6
IDENTITY_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12
WEIGHT_FLOOR = -1e-14
QUANTILE_RATIO_LIMIT = 3.0
LINEAR_R_SQUARED = 0.99
RATE_GRID = {"geometric": [6, 14]}

PROX_TRIPLES = (
    (MirrorKind.EUCLIDEAN, DomainKind.ALL_SPACE, RegularizerKind.ZERO),
    (MirrorKind.EUCLIDEAN, DomainKind.BOX, RegularizerKind.ZERO),
    (MirrorKind.EUCLIDEAN, DomainKind.L2_BALL, RegularizerKind.ZERO),
    (MirrorKind.EUCLIDEAN, DomainKind.SIMPLEX, RegularizerKind.ZERO),
    (MirrorKind.EUCLIDEAN, DomainKind.ALL_SPACE, RegularizerKind.L1),
    (MirrorKind.EUCLIDEAN, DomainKind.BOX, RegularizerKind.L1),
    (MirrorKind.EUCLIDEAN, DomainKind.ALL_SPACE, RegularizerKind.QUADRATIC),
    (MirrorKind.EUCLIDEAN, DomainKind.BOX, RegularizerKind.QUADRATIC),
    (MirrorKind.EUCLIDEAN, DomainKind.L2_BALL, RegularizerKind.QUADRATIC),
    (MirrorKind.EUCLIDEAN, DomainKind.SIMPLEX, RegularizerKind.QUADRATIC),
    (MirrorKind.ENTROPIC_SIMPLEX, DomainKind.SIMPLEX, RegularizerKind.ZERO),
    (MirrorKind.P_UNIFORM, DomainKind.ALL_SPACE, RegularizerKind.ZERO),
)

# (problem, rule) pairs of the expectation-bound check
EXPECTED_BOUND_CASES = (
    ("abs_d5", "convex_anytime"),
    ("quad_d5", "convex_anytime"),
    ("quad_abs_d5", "convex_anytime"),
    ("quad_strong_d5", "strc_f_anytime_1"),
    ("quad_ridge_d5", "strc_h_anytime"),
    ("huber_d5", "convex_fixed"),
    ("lse_simplex_d5", "convex_anytime"),
)

NOISE_CASES = (
    NoiseModel(NoiseGenerator.GAUSSIAN, 1.0),
    NoiseModel(NoiseGenerator.SPHERE_BOUNDED, 1.0),
    NoiseModel(NoiseGenerator.SCALED_GAUSSIAN_MGF, 1.0),
    NoiseModel(NoiseGenerator.SYMMETRIC_PARETO, 1.0, p=1.5),
    NoiseModel(NoiseGenerator.SYMMETRIC_WEIBULL, 1.0, p=1.0),
)

# constants every rule is audited with
SEQUENCE_CASES = {
    Rule.CONVEX_ANYTIME: {"L": 1.0},
    Rule.CONVEX_FIXED: {"L": 1.0},
    Rule.ZAMANI: {},
    Rule.STRC_F_ANYTIME_1: {"L": 1.0, "mu_f": 0.5},
    Rule.STRC_F_ANYTIME_2: {"L": 1.0, "mu_f": 0.5},
    Rule.STRC_F_KNOWN_PIECEWISE: {"L": 1.0, "mu_f": 0.5, "eta": 1.5},
    Rule.STRC_H_ANYTIME: {"L": 1.0, "mu_h": 0.5},
    Rule.STRC_H_KNOWN_PIECEWISE: {"L": 1.0, "mu_h": 0.5, "eta": 1.5},
    Rule.HEAVY_ANYTIME: {"p": 1.5},
    Rule.HEAVY_FIXED: {"p": 1.5},
    Rule.HEAVY_ZAMANI: {"p": 1.5},
    Rule.SUBWEIBULL_ANYTIME: {"L": 1.0},
    Rule.SUBWEIBULL_FIXED: {"L": 1.0},
    Rule.SUBWEIBULL_ZAMANI: {},
    Rule.CONSTANT: {"L": 1.0, "eta": 0.1},
}


@dataclass(frozen=True)
class AcceptanceSettings:
    """
    Knobs shared by every criterion.

    Attributes:
        base_seed: Seed of every random stream
        jobs: Worker processes for the Monte Carlo experiments
    """

    base_seed: int = 0
    jobs: int = 1


@dataclass(frozen=True, eq=False)
class CriterionResult:
    """
    Verdict of one acceptance criterion.

    Attributes:
        number: Position in the matrix, 1..12
        name: Short identifier
        verdict: PASS or FAIL
        detail: Measured values behind the verdict
        experiments: Experiments whose tables go into results.csv
    """

    number: int
    name: str
    verdict: Verdict
    detail: str
    experiments: tuple[ExperimentResult, ...] = ()

    def line(self) -> str:
        """The machine-checkable acceptance line."""
        return f"CRITERION {self.number} {self.name}: {self.verdict.value} {self.detail}"


def _verdict(ok: bool) -> Verdict:
    return Verdict.PASS if ok else Verdict.FAIL


def _experiment(settings: AcceptanceSettings, name: str, index: int, problem: str,
                noise: dict[str, Any], schedule: dict[str, Any], T_grid: Any,
                replications: int, **extra: Any) -> ExperimentResult:
    raw = {"experiment": name, "index": index, "problem": problem, "noise": noise,
           "schedule": schedule, "T_grid": T_grid, "replications": replications,
           "base_seed": settings.base_seed, "jobs": settings.jobs, **extra}
    return run_experiment(parse_config(raw))


def _random_domain(kind: DomainKind, d: int, rng: np.random.Generator) -> Domain:
    if kind == DomainKind.BOX:
        lower = rng.uniform(-2.0, 0.0, d)
        return Domain.box(lower, lower + rng.uniform(0.1, 3.0, d))
    if kind == DomainKind.L2_BALL:
        return Domain.l2_ball(d, float(rng.uniform(0.5, 2.0)), 0.5 * rng.standard_normal(d))
    if kind == DomainKind.SIMPLEX:
        return Domain.simplex(d)
    return Domain.all_space(d)


def _random_prox(triple: tuple[MirrorKind, DomainKind, RegularizerKind],
                 rng: np.random.Generator) -> ProxProblem:
    mirror_kind, domain_kind, h_kind = triple
    d = int(rng.integers(1, 5))
    p = float(rng.uniform(1.2, 1.8)) if mirror_kind == MirrorKind.P_UNIFORM else None
    mirror = MirrorMap(mirror_kind, d, p)
    domain = _random_domain(domain_kind, d, rng)
    lam = 0.0 if h_kind == RegularizerKind.ZERO else float(rng.uniform(0.1, 2.0))
    if mirror_kind == MirrorKind.ENTROPIC_SIMPLEX:
        anchor = np.maximum(rng.dirichlet(np.ones(d)), 1e-3)
        anchor /= np.sum(anchor)
    else:
        anchor = domain.sample(rng, 1, scale=2.0)[0]
    return ProxProblem(rng.standard_normal(d), anchor, float(rng.uniform(0.05, 2.0)),
                       CompositeRegularizer(h_kind, lam), domain, mirror)


def prox_equivalence(settings: AcceptanceSettings, instances: int = 100) -> CriterionResult:
    """
    The exact prox step is never beaten by a numerical minimizer.

    Every whitelisted triple is tried on random instances of dimension 1..4;
    the exact solution passes if its subproblem objective is within 1e-6 of
    (or below) the objective of the scipy reference solution.
    """
    rng = RngStream.derive(settings.base_seed, 1, 0).generator()
    worst = -np.inf
    failures = 0
    for triple in PROX_TRIPLES:
        for _ in range(instances):
            problem = _random_prox(triple, rng)
            exact = prox_objective(problem, solve_prox(problem))
            reference = prox_objective(problem, reference_prox(problem))
            excess = (exact - reference) / max(1.0, abs(reference))
            worst = max(worst, excess)
            if excess > PROX_TOL:
                failures += 1
                logger.warning("prox %s: exact %.12g vs reference %.12g",
                               "/".join(k.value for k in triple), exact, reference)
    detail = (f"triples={len(PROX_TRIPLES)} instances={instances} "
              f"worst_excess={worst:.3e} failures={failures}")
    return CriterionResult(1, "prox_equivalence", _verdict(failures == 0), detail)


def expected_bound_dominance(settings: AcceptanceSettings,
                             replications: int = 500) -> CriterionResult:
    """mean - 2 se stays below the expectation bound on every configuration and horizon."""
    experiments = []
    worst = 0.0
    passed = True
    for k, (problem, rule) in enumerate(EXPECTED_BOUND_CASES):
        result = _experiment(settings, f"expected_{problem}_{rule}", 20 + k, problem,
                             {"generator": "gaussian", "sigma": 1.0}, {"rule": rule},
                             [64, 256], replications, bound="expected")
        experiments.append(result)
        failed = any(o.record is None for o in result.outcomes)
        passed = passed and result.passed and bool(result.dominance) and not failed
        for report in result.dominance:
            for line in report.lines:
                worst = max(worst, line.statistic / line.bound if line.bound > 0 else np.inf)
    detail = f"configurations={len(EXPECTED_BOUND_CASES)} worst_ratio={worst:.3f}"
    return CriterionResult(2, "expected_bound_dominance", _verdict(passed), detail,
                           tuple(experiments))


def hp_quantile_dominance(settings: AcceptanceSettings,
                          replications: int = 5000) -> CriterionResult:
    """Empirical quantiles stay below the sub-Gaussian bound and grow slowly in delta."""
    result = _experiment(settings, "hp_quad_d5", 30, "quad_d5",
                         {"generator": "scaled_gaussian_mgf", "sigma": 1.0},
                         {"rule": "convex_anytime"}, [256], replications,
                         delta_grid=[0.1, 0.01], bound="hp")
    report = result.quantile_reports.get(256)
    ratio = report.ratio if report is not None else None
    ok = (result.passed and bool(result.dominance) and ratio is not None
          and ratio <= QUANTILE_RATIO_LIMIT)
    lines = [f"{line.label}={line.statistic:.4g}<={line.bound:.4g}"
             for r in result.dominance for line in r.lines]
    detail = " ".join(lines) + f" ratio={ratio if ratio is not None else float('nan'):.3f}"
    return CriterionResult(3, "hp_quantile_dominance", _verdict(ok), detail, (result,))


def _slope_check(number: int, name: str, result: ExperimentResult, low: float, high: float,
                 curvature: Optional[float] = None) -> CriterionResult:
    fit = result.fit
    if fit is None:
        return CriterionResult(number, name, Verdict.FAIL, f"no fit: {result.fit_error}",
                               (result,))
    ok = low <= fit.slope <= high
    detail = f"slope={fit.slope:.4f} in [{low}, {high}] r2={fit.r_squared:.4f}"
    if curvature is not None:
        ok = ok and abs(fit.curvature) <= curvature
        detail += f" curvature={fit.curvature:.4f} within {curvature}"
    return CriterionResult(number, name, _verdict(ok), detail, (result,))


def convex_rate(settings: AcceptanceSettings, replications: int = 200) -> CriterionResult:
    """Lipschitz instance with the anytime 1/sqrt(t) rule decays like T^(-1/2) up to logs."""
    result = _experiment(settings, "rate_convex_anytime", 40, "abs_d5",
                         {"generator": "gaussian", "sigma": 1.0}, {"rule": "convex_anytime"},
                         RATE_GRID, replications, estimator="median_of_means", fit="power")
    return _slope_check(4, "convex_rate", result, -0.62, -0.38)


def zamani_rate(settings: AcceptanceSettings, replications: int = 200) -> CriterionResult:
    """The linearly decaying known-T rule removes the log factor."""
    result = _experiment(settings, "rate_zamani", 50, "abs_d5",
                         {"generator": "gaussian", "sigma": 1.0}, {"rule": "zamani"},
                         RATE_GRID, replications, estimator="median_of_means", fit="power")
    return _slope_check(5, "zamani_rate", result, -0.60, -0.40, curvature=0.02)


def noiseless_smooth_rate(settings: AcceptanceSettings) -> CriterionResult:
    """Without noise, eta = 1/(2L) on a smooth instance recovers the 1/T rate."""
    result = _experiment(settings, "rate_noiseless_smooth", 60, "quad_spectrum_d50",
                         {"generator": "gaussian", "sigma": 0.0}, {"rule": "constant"},
                         RATE_GRID, 1, fit="power")
    return _slope_check(6, "noiseless_smooth_rate", result, -1.15, -0.85)


def strongly_convex_rate(settings: AcceptanceSettings,
                         replications: int = 200) -> CriterionResult:
    """A Lipschitz strongly convex instance with 1/(mu_f t) steps decays like 1/T up to logs."""
    result = _experiment(settings, "rate_strongly_convex", 70, "quad_ball_lipschitz_d5",
                         {"generator": "gaussian", "sigma": 1.0},
                         {"rule": "strc_f_anytime_1"}, RATE_GRID, replications,
                         estimator="median_of_means", fit="power")
    return _slope_check(7, "strongly_convex_rate", result, -1.15, -0.75)


def linear_convergence(settings: AcceptanceSettings) -> CriterionResult:
    """Noiseless known-T piecewise steps converge linearly until the floating-point floor."""
    result = _experiment(settings, "linear_piecewise", 80, "quad_strong_d5",
                         {"generator": "gaussian", "sigma": 0.0},
                         {"rule": "strc_f_known_piecewise", "eta": 1.5},
                         list(range(10, 151, 10)), 1, fit="exponential")
    fit = result.fit
    if fit is None:
        return CriterionResult(8, "linear_convergence", Verdict.FAIL,
                               f"no fit: {result.fit_error}", (result,))
    ok = fit.slope < 0 and fit.r_squared >= LINEAR_R_SQUARED
    detail = (f"slope={fit.slope:.4f} r2={fit.r_squared:.5f} points={len(fit.T)} "
              f"dropped={list(fit.dropped)}")
    return CriterionResult(8, "linear_convergence", _verdict(ok), detail, (result,))


def heavy_tailed_rate(settings: AcceptanceSettings, replications: int = 400) -> CriterionResult:
    """Pareto noise with p = 1.5 under the heavy-tailed Zamani rule decays like T^(-1/3)."""
    result = _experiment(settings, "rate_heavy_zamani", 90, "abs_puniform_d5",
                         {"generator": "symmetric_pareto", "sigma": 1.0, "p": 1.5},
                         {"rule": "heavy_zamani"}, {"geometric": [6, 12]}, replications,
                         estimator="median_of_means", fit="power")
    return _slope_check(9, "heavy_tailed_rate", result, -0.45, -0.21)


def noise_certification(settings: AcceptanceSettings, samples: int = 1_000_000,
                        dimension: int = 3) -> CriterionResult:
    """Every shipped generator passes the Monte Carlo check of its declared assumption."""
    verdicts = []
    ok = True
    for k, model in enumerate(NOISE_CASES):
        try:
            report = validate_noise(model, samples,
                                    RngStream.derive(settings.base_seed, 100 + k, 0), dimension)
            passed = report.passed
        except CsmdError as err:
            logger.warning("noise %s: %s", model.generator.value, err)
            passed = False
        ok = ok and passed
        verdicts.append(f"{model.generator.value}={'PASS' if passed else 'FAIL'}")
    return CriterionResult(10, "noise_certification", _verdict(ok),
                           f"samples={samples} " + " ".join(verdicts))


def _sequence_violation(rule: Rule, constants: dict[str, float], T: int) -> float:
    s = Schedule(rule, horizon=T, **constants)
    seq = analysis_sequences(s, s.mu_f, s.mu_h, T)
    left = seq.log_gamma[1:] + np.log(1.0 / seq.eta[1:] - seq.mu_f)
    right = seq.log_gamma[:-1] + np.log(1.0 / seq.eta[:-1] + seq.mu_h)
    telescoping = np.max(np.abs(left - right) / np.maximum(1.0, np.abs(right)), initial=0.0)
    monotone = max(0.0, -float(np.min(np.diff(seq.v))))
    normalized = abs(float(seq.v[-1]) - 1.0)
    return float(max(telescoping, monotone, normalized))


def sequence_identities(settings: AcceptanceSettings, T: int = 1000) -> CriterionResult:
    """
    gamma telescopes, v is a non-decreasing sequence ending at 1, and the
    comparator points z^t are convex combinations.
    """
    worst = max(_sequence_violation(rule, constants, T)
                for rule, constants in SEQUENCE_CASES.items())
    problem = get_problem("quad_d5")
    schedule = Schedule(Rule.CONVEX_ANYTIME, 0.5, L=problem.L)
    run = RunConfig(problem, NoiseModel(NoiseGenerator.GAUSSIAN, 1.0), schedule,
                    problem.default_start, 50, record_z_diagnostics=True,
                    rng=RngStream.derive(settings.base_seed, 110, 0))
    record = run_csmd(run)
    zs = z_diagnostics(record, analysis_sequences(schedule, problem.mu_f, problem.mu_h, 50),
                       problem.x_star, problem)
    sum_error = max(abs(z.weight_sum - 1.0) for z in zs)
    min_weight = min(z.min_weight for z in zs)
    ok = worst <= IDENTITY_TOL and sum_error <= WEIGHT_SUM_TOL and min_weight >= WEIGHT_FLOOR
    detail = (f"rules={len(SEQUENCE_CASES)} worst_violation={worst:.3e} "
              f"weight_sum_error={sum_error:.3e} min_weight={min_weight:.3e}")
    return CriterionResult(11, "sequence_identities", _verdict(ok), detail)


def _determinism_run(settings: AcceptanceSettings) -> ExperimentResult:
    return _experiment(settings, "determinism", 120, "quad_l1_d5",
                       {"generator": "gaussian", "sigma": 1.0}, {"rule": "convex_anytime"},
                       [16, 32], 20)


def _digest(result: ExperimentResult) -> str:
    return hashlib.sha256(table_csv(result.table).encode("utf-8")).hexdigest()


def determinism(settings: AcceptanceSettings) -> CriterionResult:
    """
    Two parallel runs with the same seed write byte-identical results.csv
    files, and a serial run produces the same table.
    """
    parallel = AcceptanceSettings(settings.base_seed, max(2, settings.jobs))
    digests = []
    result = None
    for _ in range(2):
        result = _determinism_run(parallel)
        with tempfile.TemporaryDirectory() as tmp:
            csv_path, _ = write_outputs([result], tmp)
            digests.append(hashlib.sha256(csv_path.read_bytes()).hexdigest())
    serial = _digest(_determinism_run(AcceptanceSettings(settings.base_seed, 1)))
    assert result is not None
    ok = digests[0] == digests[1] == serial
    return CriterionResult(12, "determinism", _verdict(ok),
                           f"sha256={digests[0][:16]} vs {digests[1][:16]} serial={serial[:16]}",
                           (result,))


CRITERIA: tuple[Callable[[AcceptanceSettings], CriterionResult], ...] = (
    prox_equivalence,
    expected_bound_dominance,
    hp_quantile_dominance,
    convex_rate,
    zamani_rate,
    noiseless_smooth_rate,
    strongly_convex_rate,
    linear_convergence,
    heavy_tailed_rate,
    noise_certification,
    sequence_identities,
    determinism,
)


def _guarded(number: int, criterion: Callable[[AcceptanceSettings], CriterionResult],
             settings: AcceptanceSettings) -> CriterionResult:
    try:
        return criterion(settings)
    except CsmdError as err:
        logger.error("criterion %d aborted: %s", number, err)
        return CriterionResult(number, criterion.__name__, Verdict.FAIL,
                               f"error={type(err).__name__}: {err}")


def write_acceptance(results: Sequence[CriterionResult], out_dir: str | Path) -> Path:
    """Write acceptance.txt with one line per criterion."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "acceptance.txt"
    path.write_text("".join(r.line() + "\n" for r in results), encoding="utf-8")
    return path


def run_acceptance(settings: AcceptanceSettings, out_dir: str | Path,
                   only: Optional[Sequence[int]] = None) -> tuple[CriterionResult, ...]:
    """
    Run the acceptance matrix and write its outputs.

    Args:
        settings: Seed and parallelism
        out_dir: Directory receiving results.csv, summary.json and acceptance.txt
        only: Criterion numbers to run, all of them by default

    Returns:
        One result per criterion run, in matrix order
    """
    results = []
    for number, criterion in enumerate(CRITERIA, start=1):
        if only is not None and number not in only:
            continue
        logger.info("criterion %d %s: running", number, criterion.__name__)
        result = _guarded(number, criterion, settings)
        logger.info("%s", result.line())
        results.append(result)
    experiments = [e for r in results for e in r.experiments]
    if experiments:
        write_outputs(experiments, out_dir)
    write_acceptance(results, out_dir)
    return tuple(results)
