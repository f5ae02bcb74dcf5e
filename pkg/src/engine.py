"""
The composite stochastic mirror descent loop and the bound evaluators.

run_csmd iterates x^{t+1} = argmin_x h(x) + <g^t, x - x^t> + D_psi(x, x^t) / eta_t
with stochastic gradients g^t and records the exact objective gap at the
requested checkpoints. expected_bound, hp_bound and subweibull_hp_bound
evaluate the right-hand sides the last iterate is compared against.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from src.errors import (DomainError, HistoryNotRetained, InfeasiblePoint, NonInteriorPoint,
                        NumericalDivergence)
from src.geometry import bregman, prox_solver
from src.kinds import MirrorKind
from src.noise import NoiseModel, RngStream, sample_noisy_gradient
from src.problems import ProblemInstance, objective_gap
from src.schedules import AnalysisSequences, Schedule, c_delta_p, check_step_cap, eta_sequence

logger = logging.getLogger(__name__)

DIVERGENCE_THRESHOLD = 1e12


@dataclass(frozen=True, eq=False)
class RunConfig:
    """
    Everything one run depends on.

    Attributes:
        problem: Problem instance
        noise: Noise model
        schedule: Step-size schedule
        start: Feasible starting point x^1
        T: Number of iterations
        checkpoints: Iterations t after which F(x^{t+1}) is recorded; T is always added
        record_z_diagnostics: Keep the full iterate history
        rng: Random stream of the run
    """

    problem: ProblemInstance
    noise: NoiseModel
    schedule: Schedule
    start: np.ndarray
    T: int
    checkpoints: tuple[int, ...] = ()
    record_z_diagnostics: bool = False
    rng: RngStream = RngStream(0, 0)

    def __post_init__(self) -> None:
        if not isinstance(self.T, int) or self.T < 1:
            raise ValueError("Horizon T must be a positive integer")
        if not self.problem.domain.contains(self.start):
            raise InfeasiblePoint("Starting point lies outside the domain")
        if (self.problem.mirror.kind == MirrorKind.ENTROPIC_SIMPLEX
                and np.any(np.asarray(self.start) <= 0)):
            raise NonInteriorPoint("Entropic runs must start in the relative interior")
        if any(not 1 <= t <= self.T for t in self.checkpoints):
            raise ValueError("Checkpoints must lie in [1, T]")
        object.__setattr__(self, "checkpoints", tuple(sorted(set(self.checkpoints) | {self.T})))

    @property
    def problem_id(self) -> str:
        """Name of the problem instance."""
        return self.problem.name


@dataclass(frozen=True)
class CheckpointRecord:
    """
    State after iteration t.

    Attributes:
        t: Iteration index
        gap: F(x^{t+1}) - F(x*)
        eta: Step size eta_t
        distance: ||x^{t+1} - x*||_2
        bregman: D_psi(x*, x^{t+1})
    """

    t: int
    gap: float
    eta: float
    distance: float
    bregman: float


@dataclass(frozen=True)
class ZRecord:
    """
    Diagnostic of the comparator point z^t.

    Attributes:
        t: Index in 0..T
        gap: F(z^t) - F(x*)
        min_weight: Smallest convex-combination weight
        weight_sum: Sum of the weights
        jensen_slack: sum_s w_s F(point_s) - F(z^t), >= 0 up to rounding
    """

    t: int
    gap: float
    min_weight: float
    weight_sum: float
    jensen_slack: float


@dataclass(frozen=True, eq=False)
class RunRecord:
    """
    Outcome of run_csmd.

    Equality compares every recorded value except the wall time.

    Attributes:
        problem_id: Name of the problem instance
        rng: Stream the run drew from
        checkpoints: One record per checkpoint, the last one at t = T
        final: The last iterate x^{T+1}
        history: Iterates x^1 .. x^{T+1} when z-diagnostics were requested
        wall_time: Seconds spent in the loop
    """

    problem_id: str
    rng: RngStream
    checkpoints: tuple[CheckpointRecord, ...]
    final: np.ndarray
    history: Optional[np.ndarray] = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def gap_final(self) -> float:
        """F(x^{T+1}) - F(x*)."""
        return self.checkpoints[-1].gap

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunRecord):
            return NotImplemented
        same_history = (self.history is None and other.history is None) or (
            self.history is not None and other.history is not None
            and np.array_equal(self.history, other.history))
        return (self.problem_id == other.problem_id and self.rng == other.rng
                and self.checkpoints == other.checkpoints
                and np.array_equal(self.final, other.final) and same_history)

    def __hash__(self) -> int:
        return hash((self.problem_id, self.rng, self.checkpoints))


def initial_distance(problem: ProblemInstance, start: np.ndarray) -> float:
    """D_psi(x*, x^1), the distance every bound and tuning is stated in."""
    return bregman(problem.mirror, problem.x_star, start)


def run_csmd(c: RunConfig) -> RunRecord:
    """
    Run T iterations of composite stochastic mirror descent.

    Args:
        c: Run configuration

    Returns:
        The run record

    Raises:
        UnsupportedCombination: If the problem has no exact prox step
        StepTooLarge: If the schedule violates 1 / (2L v mu_f)
        NumericalDivergence: If the gap exceeds 1e12 or stops being finite
        InfeasiblePoint: If a prox step leaves the domain
    """
    p = c.problem
    solver = prox_solver(p.mirror, p.domain, p.h)
    check_step_cap(c.schedule, c.T)
    steps = eta_sequence(c.schedule, c.T)
    rng = c.rng.generator()
    wanted = set(c.checkpoints)
    x = np.array(c.start, dtype=float)
    history = [x] if c.record_z_diagnostics else None
    records = []
    began = time.perf_counter()
    for t in range(1, c.T + 1):
        g = sample_noisy_gradient(p, c.noise, x, rng)
        x = solver(g, x, steps[t - 1])
        gap = objective_gap(p, x)
        if not math.isfinite(gap) or gap > DIVERGENCE_THRESHOLD:
            raise NumericalDivergence(f"Gap {gap:.3e} at t={t} on {p.name}")
        if not p.domain.contains(x):
            raise InfeasiblePoint(f"Prox step left the domain at t={t} on {p.name}")
        if history is not None:
            history.append(x)
        if t in wanted:
            records.append(CheckpointRecord(
                t, gap, float(steps[t - 1]), float(np.linalg.norm(x - p.x_star)),
                bregman(p.mirror, p.x_star, x)))
    elapsed = time.perf_counter() - began
    logger.debug("run %s stream %d: T=%d gap %.3e in %.2fs", p.name, c.rng.stream_id,
                 c.T, records[-1].gap, elapsed)
    return RunRecord(p.name, c.rng, tuple(records), x,
                     None if history is None else np.array(history), elapsed)


def comparator_weights(v: np.ndarray, t: int) -> np.ndarray:
    """
    Weights of z^t on (x, x^1, ..., x^t).

    Args:
        v: Normalized tail weights v_0 .. v_T
        t: Index in 0..T

    Returns:
        (v_0 / v_t, (v_1 - v_0) / v_t, ..., (v_t - v_{t-1}) / v_t)
    """
    v = np.asarray(v, dtype=float)
    if not 0 <= t < v.size:
        raise ValueError(f"t must lie in [0, {v.size - 1}]")
    return np.concatenate(([v[0]], np.diff(v[:t + 1]))) / v[t]


def z_diagnostics(record: RunRecord, sequences: AnalysisSequences, x_ref: np.ndarray,
                  problem: ProblemInstance) -> tuple[ZRecord, ...]:
    """
    Evaluate z^t = (v_0 / v_t) x + sum_{s<=t} ((v_s - v_{s-1}) / v_t) x^s for t = 0..T.

    Args:
        record: Run with retained history
        sequences: Analysis sequences of the run's schedule
        x_ref: Comparator x, normally x*
        problem: Problem the run solved

    Returns:
        One record per t

    Raises:
        HistoryNotRetained: If the run did not keep its iterates
    """
    if record.history is None:
        raise HistoryNotRetained("Run without record_z_diagnostics has no iterate history")
    T = sequences.T
    if record.history.shape[0] < T + 1:
        raise ValueError("History is shorter than the horizon of the sequences")
    # row 0 is the comparator, row s the iterate x^s
    points = np.vstack([np.asarray(x_ref, dtype=float), record.history[:T]])
    values = np.array([problem.value(point) for point in points])
    out = []
    for t in range(T + 1):
        w = comparator_weights(sequences.v, t)
        z = w @ points[:t + 1]
        value = problem.value(z)
        out.append(ZRecord(t, value - problem.F_star, float(np.min(w)), float(np.sum(w)),
                           float(w @ values[:t + 1] - value)))
    return tuple(out)


def _check_steps(sequences: AnalysisSequences, eta: Optional[Sequence[float]]) -> None:
    if eta is not None and not np.allclose(np.asarray(eta, dtype=float), sequences.eta,
                                           rtol=1e-12, atol=0.0):
        raise ValueError("Step sizes do not match the analysis sequences")


def _noise_sum(sequences: AnalysisSequences) -> float:
    """sum_t gamma_t eta_t / sum_{s>=t} gamma_s."""
    terms = sequences.log_gamma + np.log(sequences.eta) - sequences.log_tail
    return float(np.sum(np.exp(terms)))


def _distance_term(sequences: AnalysisSequences, D: float) -> float:
    """D / sum_t gamma_t."""
    return D * math.exp(-float(sequences.log_tail[0]))


def _worst_contraction(sequences: AnalysisSequences, mu_f: float) -> float:
    """max_{2<=t<=T} 1 / (1 - mu_f eta_t), 1 for T = 1."""
    if sequences.T < 2:
        return 1.0
    return float(np.max(1.0 / (1.0 - mu_f * sequences.eta[1:])))


def expected_bound(sequences: AnalysisSequences, D: float, M: float, sigma: float,
                   mu_f: float, eta: Optional[Sequence[float]] = None) -> float:
    """
    Expectation bound on F(x^{T+1}) - F(x*):

        (1 - mu_f eta_1) D / sum_t gamma_t
            + 2 (M^2 + sigma^2) sum_t gamma_t eta_t / sum_{s>=t} gamma_s

    Args:
        sequences: Analysis sequences of the schedule
        D: D_psi(x*, x^1)
        M: Non-smoothness constant
        sigma: Noise level
        mu_f: Strong convexity of f
        eta: Optional step sizes, checked against the sequences

    Returns:
        The bound
    """
    _check_steps(sequences, eta)
    lead = (1.0 - mu_f * float(sequences.eta[0])) * _distance_term(sequences, D)
    return lead + 2.0 * (M ** 2 + sigma ** 2) * _noise_sum(sequences)


def hp_bound(sequences: AnalysisSequences, D: float, M: float, sigma: float, mu_f: float,
             eta: Optional[Sequence[float]], delta: float) -> float:
    """
    Sub-Gaussian high-probability bound holding with probability >= 1 - delta:

        2 (1 + max_{2<=t<=T} 1 / (1 - mu_f eta_t))
            * [D / sum_t gamma_t + (M^2 + sigma^2 (1 + 2 ln(2/delta))) S]

    with S = sum_t gamma_t eta_t / sum_{s>=t} gamma_s.

    Raises:
        DomainError: If delta is outside (0, 1)
    """
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    _check_steps(sequences, eta)
    lead = 2.0 * (1.0 + _worst_contraction(sequences, mu_f))
    noise = M ** 2 + sigma ** 2 * (1.0 + 2.0 * math.log(2.0 / delta))
    return lead * (_distance_term(sequences, D) + noise * _noise_sum(sequences))


def subweibull_hp_bound(sequences: AnalysisSequences, D: float, M: float, sigma: float,
                        mu_f: float, delta: float, p: float) -> float:
    """Sub-Weibull counterpart of hp_bound, with sigma^2 C(delta, p) as the noise factor."""
    constant = c_delta_p(delta, p)
    lead = 2.0 * _worst_contraction(sequences, mu_f)
    noise = M ** 2 + (sigma ** 2 * constant if sigma > 0 else 0.0)
    return lead * (_distance_term(sequences, D) + 2.0 * noise * _noise_sum(sequences))
