"""
Estimators and rate fits used by the harness.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from src.errors import NonPositiveGap

logger = logging.getLogger(__name__)

TRIM_FRACTION = 0.01
MOM_BLOCKS = 10
MIN_FIT_POINTS = 4


def standard_error(values: Sequence[float]) -> float:
    """Standard error of the sample mean, 0 for fewer than two values."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return 0.0
    return float(np.std(arr, ddof=1) / np.sqrt(arr.size))


def median_of_means(values: Sequence[float], blocks: int = MOM_BLOCKS) -> float:
    """
    Median of the means of contiguous blocks.

    Blocks follow the order of the values, so the estimate is deterministic
    once the values are sorted by replication index.

    Args:
        values: Sample
        blocks: Number of blocks, clipped to the sample size

    Returns:
        The median-of-means estimate
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("Median of means needs at least one value")
    k = max(1, min(blocks, arr.size))
    return float(np.median([chunk.mean() for chunk in np.array_split(arr, k)]))


def trimmed_mean(values: Sequence[float], fraction: float = TRIM_FRACTION) -> float:
    """Mean after cutting the given fraction from each tail."""
    return float(stats.trim_mean(np.asarray(values, dtype=float), fraction))


@dataclass(frozen=True)
class RateFit:
    """
    Least-squares fit of ln(gap) against ln(T).

    Attributes:
        slope: Fitted exponent
        intercept: Fitted ln-constant
        r_squared: Coefficient of determination in [0, 1]
        curvature: Quadratic coefficient of a degree-2 fit in ln(T)
        T: Horizons used by the fit
        gaps: Gap estimates used by the fit
        se: Standard errors of the gap estimates (zeros if unknown)
        dropped: Horizons excluded by the floating-point floor
    """

    slope: float
    intercept: float
    r_squared: float
    curvature: float
    T: tuple[int, ...]
    gaps: tuple[float, ...]
    se: tuple[float, ...]
    dropped: tuple[int, ...] = ()


def numerical_floor(F_star: float) -> float:
    """Gaps below 1e3 * eps * max(1, |F*|) are rounding noise."""
    return 1e3 * float(np.finfo(float).eps) * max(1.0, abs(F_star))


def _split_floor(T: np.ndarray, gaps: np.ndarray, floor: float):
    negative = gaps < -floor
    if np.any(negative):
        bad = [int(t) for t in T[negative]]
        raise NonPositiveGap(f"Gaps at T={bad} are below zero beyond the floor {floor:.3e}")
    keep = gaps >= floor
    dropped = tuple(int(t) for t in T[~keep])
    if dropped:
        logger.warning("rate fit drops horizons %s below the numerical floor %.3e",
                       dropped, floor)
    return keep, dropped


def fit_rate(points: Sequence[tuple[int, float]], se: Sequence[float] = (),
             floor: float = 0.0) -> RateFit:
    """
    Fit gap ~ C * T^slope on log-log coordinates.

    Args:
        points: (T, gap estimate) pairs
        se: Optional standard errors, reported alongside the fit
        floor: Points with gap < floor are dropped before fitting; a gap
            below -floor is an error, not rounding noise

    Returns:
        The fit

    Raises:
        NonPositiveGap: If a gap is below -floor or a kept gap is <= 0
        ValueError: If fewer than 4 points remain
    """
    T = np.array([t for t, _ in points], dtype=float)
    gaps = np.array([g for _, g in points], dtype=float)
    errors = np.asarray(se, dtype=float) if len(se) else np.zeros_like(gaps)
    keep, dropped = _split_floor(T, gaps, floor)
    T, gaps, errors = T[keep], gaps[keep], errors[keep]
    if np.any(gaps <= 0):
        raise NonPositiveGap("Rate fits need strictly positive gaps")
    if T.size < MIN_FIT_POINTS:
        raise ValueError(f"Rate fits need at least {MIN_FIT_POINTS} points, got {T.size}")
    x, y = np.log(T), np.log(gaps)
    result = stats.linregress(x, y)
    curvature = float(np.polyfit(x, y, 2)[0])
    return RateFit(float(result.slope), float(result.intercept),
                   float(min(1.0, result.rvalue ** 2)), curvature,
                   tuple(int(t) for t in T), tuple(float(g) for g in gaps),
                   tuple(float(e) for e in errors), dropped)


def fit_exponential_rate(points: Sequence[tuple[int, float]], floor: float = 0.0) -> RateFit:
    """
    Fit ln(gap) ~ intercept + slope * T, the signature of linear convergence.

    Points under the floor are dropped; at least 3 must remain.

    Raises:
        NonPositiveGap: If a gap is below -floor or a kept gap is <= 0
    """
    T = np.array([t for t, _ in points], dtype=float)
    gaps = np.array([g for _, g in points], dtype=float)
    keep, dropped = _split_floor(T, gaps, floor)
    T, gaps = T[keep], gaps[keep]
    if np.any(gaps <= 0):
        raise NonPositiveGap("Exponential fits need strictly positive gaps")
    if T.size < 3:
        raise ValueError("Exponential fits need at least 3 points above the floor")
    y = np.log(gaps)
    result = stats.linregress(T, y)
    curvature = float(np.polyfit(T, y, 2)[0])
    return RateFit(float(result.slope), float(result.intercept),
                   float(min(1.0, result.rvalue ** 2)), curvature,
                   tuple(int(t) for t in T), tuple(float(g) for g in gaps),
                   tuple(0.0 for _ in T), dropped)
