"""
Stochastic gradient oracles and empirical checks of the noise hypotheses.

Noise is additive and independent of the query point: the oracle returns
true_subgradient(p, x) + xi. Every generator is symmetric about zero and is
calibrated so that its declared assumption holds in the l2 norm, which
dominates the dual norm of every shipped geometry.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from src.errors import InsufficientSamples
from src.kinds import Assumption, NoiseGenerator
from src.problems import ProblemInstance, true_subgradient
from src.stats import median_of_means

logger = logging.getLogger(__name__)

GAUSSIAN_VARIANCE_MARGIN = 0.9
MGF_VARIANCE_DIVISOR = 2.5
WEIBULL_CALIBRATION = 1.6
LAMBDA_GRID = (0.1, 0.25, 0.5, 0.75, 1.0)
MIN_SAMPLES = 10_000
MAX_RELATIVE_SE = 0.2
STREAMS_PER_EXPERIMENT = 1_000_000
ROUNDING_TOL = 1e-12
HEAVY_TAIL_BLOCK = 2_000
MEDIAN_EFFICIENCY = math.sqrt(math.pi / 2.0)

DECLARED_ASSUMPTION = {
    NoiseGenerator.GAUSSIAN: Assumption.BOUNDED_VARIANCE,
    NoiseGenerator.SPHERE_BOUNDED: Assumption.SUB_GAUSSIAN,
    NoiseGenerator.SCALED_GAUSSIAN_MGF: Assumption.SUB_GAUSSIAN,
    NoiseGenerator.SYMMETRIC_PARETO: Assumption.HEAVY_TAILED,
    NoiseGenerator.SYMMETRIC_WEIBULL: Assumption.SUB_WEIBULL,
}


@dataclass(frozen=True)
class NoiseModel:
    """
    A noise generator with its level and the assumption it is used under.

    Attributes:
        generator: Which distribution xi is drawn from
        sigma: Noise level >= 0
        p: Tail exponent, (1, 2) for symmetric_pareto and (0, 2) for symmetric_weibull
        assumption: Assumption the model is used under; defaults to what the
            generator certifies and may be any weaker assumption
    """

    generator: NoiseGenerator
    sigma: float
    p: Optional[float] = None
    assumption: Optional[Assumption] = None

    def __post_init__(self) -> None:
        if not isinstance(self.generator, NoiseGenerator):
            raise TypeError(f"Expected NoiseGenerator but got {type(self.generator)}")
        if not self.sigma >= 0:
            raise ValueError("Noise level sigma must be non-negative")
        if self.generator == NoiseGenerator.SYMMETRIC_PARETO:
            if self.p is None or not 1.0 < self.p < 2.0:
                raise ValueError("symmetric_pareto requires p in (1, 2)")
        elif self.generator == NoiseGenerator.SYMMETRIC_WEIBULL:
            if self.p is None or not 0.0 < self.p < 2.0:
                raise ValueError("symmetric_weibull requires p in (0, 2)")
        elif self.p is not None:
            raise ValueError(f"{self.generator.value} takes no tail exponent")
        natural = DECLARED_ASSUMPTION[self.generator]
        if self.assumption is None:
            object.__setattr__(self, "assumption", natural)
        elif not _implies(natural, self.p, self.assumption, self.p):
            raise ValueError(
                f"{self.generator.value} does not certify assumption {self.assumption.value}"
            )

    @property
    def natural_assumption(self) -> Assumption:
        """Strongest assumption the generator certifies."""
        return DECLARED_ASSUMPTION[self.generator]


def _implies(held: Assumption, held_p: Optional[float],
             required: Assumption, required_p: Optional[float]) -> bool:
    light = (Assumption.BOUNDED_VARIANCE, Assumption.SUB_GAUSSIAN)
    if required == Assumption.BOUNDED_VARIANCE:
        return held in light
    if required == Assumption.SUB_GAUSSIAN:
        return held == Assumption.SUB_GAUSSIAN
    if required_p is None:
        return False
    if required == Assumption.HEAVY_TAILED:
        if held in light:
            return required_p <= 2.0
        return held_p is not None and required_p <= held_p
    return held == Assumption.SUB_WEIBULL and held_p is not None and required_p <= held_p


def certifies(model: NoiseModel, required: Assumption, p: Optional[float] = None) -> bool:
    """
    Whether the model's generator satisfies a (possibly weaker) assumption.

    Sub-Gaussian noise has bounded variance; bounded variance and sub-Gaussian
    noise have a finite p-th moment for every p <= 2; a p'-th moment or a
    p'-sub-Weibull tail gives the p-th moment (resp. tail) for p <= p'.

    Args:
        model: Noise model
        required: Assumption a bound needs
        p: Tail exponent of the required assumption (5C and 5D)

    Returns:
        True if the requirement is implied
    """
    return _implies(model.natural_assumption, model.p, required, p)


@dataclass(frozen=True)
class RngStream:
    """
    A reproducible random stream keyed by (base_seed, stream_id).

    Attributes:
        base_seed: Experiment-wide seed
        stream_id: Index of the stream within the experiment
    """

    base_seed: int
    stream_id: int

    def __post_init__(self) -> None:
        if self.base_seed < 0 or self.stream_id < 0:
            raise ValueError("Seeds and stream ids must be non-negative")

    @classmethod
    def derive(cls, base_seed: int, experiment: int, replication: int) -> RngStream:
        """Stream of replication r in experiment e: stream_id = e * 10^6 + r."""
        if not 0 <= replication < STREAMS_PER_EXPERIMENT:
            raise ValueError("Replication index out of range")
        return cls(base_seed, experiment * STREAMS_PER_EXPERIMENT + replication)

    def generator(self) -> np.random.Generator:
        """A fresh numpy Generator positioned at the start of the stream."""
        return np.random.default_rng(np.random.SeedSequence([self.base_seed, self.stream_id]))


def _directions(rng: np.random.Generator, size: int, dimension: int) -> np.ndarray:
    raw = rng.standard_normal((size, dimension))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def pareto_scale(sigma: float, p: float) -> tuple[float, float]:
    """
    Shape a = (p + 2) / 2 and scale x_m with a * x_m^p / (a - p) = sigma^p.

    Args:
        sigma: Noise level
        p: Moment order in (1, 2)

    Returns:
        (a, x_m)
    """
    shape = (p + 2.0) / 2.0
    return shape, sigma * ((shape - p) / shape) ** (1.0 / p)


def draw_noise(model: NoiseModel, dimension: int, size: int,
               rng: np.random.Generator) -> np.ndarray:
    """
    Draw size independent noise vectors.

    Args:
        model: Noise model
        dimension: Ambient dimension d
        size: Number of draws
        rng: Source of randomness

    Returns:
        Array of shape (size, dimension)
    """
    sigma = model.sigma
    if sigma == 0:
        return np.zeros((size, dimension))
    if model.generator == NoiseGenerator.GAUSSIAN:
        std = sigma * np.sqrt(GAUSSIAN_VARIANCE_MARGIN / dimension)
        return std * rng.standard_normal((size, dimension))
    if model.generator == NoiseGenerator.SCALED_GAUSSIAN_MGF:
        std = sigma / np.sqrt(MGF_VARIANCE_DIVISOR * dimension)
        return std * rng.standard_normal((size, dimension))
    directions = _directions(rng, size, dimension)
    if model.generator == NoiseGenerator.SPHERE_BOUNDED:
        return sigma * directions
    assert model.p is not None
    if model.generator == NoiseGenerator.SYMMETRIC_PARETO:
        shape, x_m = pareto_scale(sigma, model.p)
        radii = x_m * (1.0 + rng.pareto(shape, size))
    else:
        scale = sigma / WEIBULL_CALIBRATION ** (1.0 / model.p)
        radii = scale * rng.standard_exponential(size) ** (1.0 / model.p)
    return radii[:, None] * directions


def sample_noisy_gradient(p: ProblemInstance, model: NoiseModel, x: np.ndarray,
                          rng: np.random.Generator) -> np.ndarray:
    """
    Unbiased stochastic gradient g + xi at x.

    Args:
        p: Problem instance
        model: Noise model
        x: Feasible query point
        rng: Generator owned by the calling run

    Returns:
        true_subgradient(p, x) + xi
    """
    g = true_subgradient(p, x)
    if model.sigma == 0:
        return g
    return g + draw_noise(model, p.dimension, 1, rng)[0]


@dataclass(frozen=True)
class MomentCheck:
    """
    One grid point of a noise validation.

    Attributes:
        lam: MGF parameter (0 for plain moment checks)
        estimate: Monte Carlo estimate of the moment or MGF
        se: Standard error of the estimate
        bound: Value the assumption allows
        passed: Whether estimate - 2 * se <= bound
    """

    lam: float
    estimate: float
    se: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class NoiseReport:
    """
    Outcome of validate_noise.

    Attributes:
        model: The validated model
        samples: Number of draws
        checks: Grid of moment or MGF checks for the declared assumption
        mean_norm: Largest absolute coordinate of the sample mean
        unbiased: Whether every coordinate of the mean lies within 5 sigma / sqrt(n)
        second_moments: Empirical E||xi||^2 on n/100, n/10 and n draws (5C only)
        passed: Whether every check passed
    """

    model: NoiseModel
    samples: int
    checks: tuple[MomentCheck, ...]
    mean_norm: float
    unbiased: bool
    second_moments: Optional[tuple[float, float, float]]
    passed: bool


def _verdict(lam: float, estimate: float, se: float, bound: float) -> MomentCheck:
    if not math.isfinite(estimate):
        return MomentCheck(lam, estimate, float("inf"), bound, False)
    if se > MAX_RELATIVE_SE * bound:
        raise InsufficientSamples(
            f"Standard error {se:.3e} exceeds {MAX_RELATIVE_SE:.0%} of the bound {bound:.3e}"
        )
    return MomentCheck(lam, estimate, se, bound,
                       bool(estimate - 2.0 * se <= bound * (1.0 + ROUNDING_TOL)))


def _check(values: np.ndarray, lam: float, bound: float) -> MomentCheck:
    estimate = float(np.mean(values))
    se = float(np.std(values, ddof=1) / np.sqrt(values.size))
    return _verdict(lam, estimate, se, bound)


def _robust_check(values: np.ndarray, bound: float) -> MomentCheck:
    """
    Moment check for draws whose power may have infinite variance.

    The estimate is the median of the means of blocks of HEAVY_TAIL_BLOCK
    draws; its standard error comes from the normal-consistent MAD of the
    block means.
    """
    blocks = max(1, values.size // HEAVY_TAIL_BLOCK)
    means = np.array([chunk.mean() for chunk in np.array_split(values, blocks)])
    estimate = median_of_means(values, blocks)
    spread = float(stats.median_abs_deviation(means, scale="normal")) if blocks > 1 else 0.0
    return _verdict(0.0, estimate, MEDIAN_EFFICIENCY * spread / math.sqrt(blocks), bound)


def validate_noise(model: NoiseModel, samples: int, rng: RngStream,
                   dimension: int = 1, claimed_sigma: Optional[float] = None) -> NoiseReport:
    """
    Monte Carlo check of the model's assumption.

    5A compares the empirical second moment of ||xi|| with sigma^2 and 5C a
    median of block means of ||xi||^p with sigma^p; 5B and 5D compare the
    empirical MGF of ||xi||^2 (||xi||^p) with exp(lam * sigma^2)
    (exp(lam * sigma^p)) on a grid of lam. A diverging MGF fails its check.

    Args:
        model: Noise model to validate
        samples: Number of draws, >= 10^4
        rng: Stream the draws come from
        dimension: Ambient dimension
        claimed_sigma: Noise level the draws are checked against, model.sigma by default

    Returns:
        The validation report

    Raises:
        InsufficientSamples: If samples < 10^4 or a standard error is too large
        ValueError: If claimed_sigma is not positive
    """
    if samples < MIN_SAMPLES:
        raise InsufficientSamples(f"Noise validation needs at least {MIN_SAMPLES} samples")
    if claimed_sigma is not None and not claimed_sigma > 0:
        raise ValueError("claimed_sigma must be positive")
    xi = draw_noise(model, dimension, samples, rng.generator())
    norms = np.linalg.norm(xi, axis=1)
    sigma = model.sigma
    level = sigma if claimed_sigma is None else claimed_sigma
    mean_norm = float(np.max(np.abs(np.mean(xi, axis=0))))
    unbiased = bool(mean_norm <= 5.0 * sigma / np.sqrt(samples))
    assumption = model.assumption
    second_moments = None
    if assumption == Assumption.HEAVY_TAILED:
        squared = norms ** 2
        second_moments = tuple(float(np.mean(squared[: samples // k])) for k in (100, 10, 1))
    if sigma == 0:
        checks: tuple[MomentCheck, ...] = ()
    elif assumption == Assumption.BOUNDED_VARIANCE:
        checks = (_check(norms ** 2, 0.0, level ** 2),)
    elif assumption == Assumption.HEAVY_TAILED:
        assert model.p is not None
        checks = (_robust_check(norms ** model.p, level ** model.p),)
    else:
        order = 2.0 if assumption == Assumption.SUB_GAUSSIAN else model.p
        assert order is not None
        powered = norms ** order
        scale = level ** order
        with np.errstate(over="ignore", invalid="ignore"):
            checks = tuple(
                _check(np.exp(k / scale * powered), k / scale, float(np.exp(k)))
                for k in LAMBDA_GRID
            )
    passed = all(c.passed for c in checks)
    logger.info("noise %s sigma=%g against %g assumption %s: %s", model.generator.value,
                sigma, level, assumption.value if assumption else "-",
                "PASS" if passed else "FAIL")
    return NoiseReport(model, samples, checks, mean_norm, unbiased,
                       second_moments, passed)  # type: ignore[arg-type]
