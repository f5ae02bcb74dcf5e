"""
Step-size rules and the sequences the last-iterate analysis is built from.

Every rule maps an iteration t in [1, T] to eta_t. Horizon-dependent rules
(fixed, known-T and Zamani variants) need the horizon at evaluation time.
The analysis sequences gamma_t and v_t are kept in log space so that the
products behind them never overflow.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import pandas as pd

from src.errors import (ConstraintViolated, DomainError, HorizonRequired, MissingConstant,
                        StepTooLarge)
from src.kinds import Rule

logger = logging.getLogger(__name__)

DEFAULT_PIECEWISE_ETA = 1.5
STEP_TOL = 1e-12

HORIZON_RULES = frozenset({
    Rule.CONVEX_FIXED, Rule.ZAMANI, Rule.STRC_F_KNOWN_PIECEWISE, Rule.STRC_H_KNOWN_PIECEWISE,
    Rule.HEAVY_FIXED, Rule.HEAVY_ZAMANI, Rule.SUBWEIBULL_FIXED, Rule.SUBWEIBULL_ZAMANI,
})
STRONG_F_RULES = frozenset({
    Rule.STRC_F_ANYTIME_1, Rule.STRC_F_ANYTIME_2, Rule.STRC_F_KNOWN_PIECEWISE,
})
STRONG_H_RULES = frozenset({Rule.STRC_H_ANYTIME, Rule.STRC_H_KNOWN_PIECEWISE})
HEAVY_RULES = frozenset({Rule.HEAVY_ANYTIME, Rule.HEAVY_FIXED, Rule.HEAVY_ZAMANI})
SUBWEIBULL_RULES = frozenset({
    Rule.SUBWEIBULL_ANYTIME, Rule.SUBWEIBULL_FIXED, Rule.SUBWEIBULL_ZAMANI,
})

# sub-Weibull rules share the convex step sizes
_CONVEX_ALIAS = {
    Rule.SUBWEIBULL_ANYTIME: Rule.CONVEX_ANYTIME,
    Rule.SUBWEIBULL_FIXED: Rule.CONVEX_FIXED,
    Rule.SUBWEIBULL_ZAMANI: Rule.ZAMANI,
}


def _condition(lipschitz: float, mu: float) -> float:
    if lipschitz == 0:
        return 0.0
    return lipschitz / mu if mu > 0 else float("inf")


@dataclass(frozen=True)
class Schedule:
    """
    A step-size rule together with the constants it reads.

    Attributes:
        rule: Which formula eta_t follows
        eta: Base step size (the piecewise rules accept any eta >= 0)
        eta_star: Cap scale of the heavy-tailed anytime/fixed rules, inf to disable
        L: Smoothness constant of f
        mu_f: Relative strong convexity of f
        mu_h: Relative strong convexity of h
        p: Tail exponent in (1, 2) for the heavy-tailed rules
        horizon: Number of iterations T, required by horizon-dependent rules
    """

    rule: Rule
    eta: float = 1.0
    eta_star: float = float("inf")
    L: float = 0.0
    mu_f: float = 0.0
    mu_h: float = 0.0
    p: Optional[float] = None
    horizon: Optional[int] = None

    def __post_init__(self) -> None:
        if not isinstance(self.rule, Rule):
            raise TypeError(f"Expected Rule but got {type(self.rule)}")
        if min(self.L, self.mu_f, self.mu_h) < 0:
            raise ValueError("Problem constants must be non-negative")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("Horizon must be a positive integer")
        piecewise = self.rule in (Rule.STRC_F_KNOWN_PIECEWISE, Rule.STRC_H_KNOWN_PIECEWISE)
        if piecewise:
            if self.eta < 0:
                raise ValueError("Piecewise rules need eta >= 0")
        elif not self.eta > 0:
            raise ValueError("Step size eta must be greater than 0")
        if self.rule in STRONG_F_RULES and self.mu_f <= 0:
            raise MissingConstant(f"{self.rule.value} needs mu_f > 0")
        if self.rule in STRONG_H_RULES and self.mu_h <= 0:
            raise MissingConstant(f"{self.rule.value} needs mu_h > 0")
        if self.rule == Rule.STRC_F_KNOWN_PIECEWISE and self.eta + self.kappa_f <= 1:
            raise ConstraintViolated("strc_f_known_piecewise needs eta + kappa_f > 1")
        if self.rule == Rule.STRC_H_KNOWN_PIECEWISE and self.eta + self.kappa_h <= 0:
            raise ConstraintViolated("strc_h_known_piecewise needs eta + kappa_h > 0")
        if self.rule in HEAVY_RULES:
            if self.p is None or not 1.0 < self.p < 2.0:
                raise MissingConstant(f"{self.rule.value} needs p in (1, 2)")
            if not self.eta_star > 0:
                raise ValueError("eta_star must be greater than 0")
        if self.horizon is not None:
            check_step_cap(self, self.horizon)

    @property
    def kappa_f(self) -> float:
        """L / mu_f, 0 when L = 0."""
        return _condition(self.L, self.mu_f)

    @property
    def kappa_h(self) -> float:
        """L / mu_h, 0 when L = 0."""
        return _condition(self.L, self.mu_h)

    @property
    def step_cap(self) -> float:
        """1 / (2L v mu_f), inf when both vanish."""
        top = max(2.0 * self.L, self.mu_f)
        return 1.0 / top if top > 0 else float("inf")

    def with_horizon(self, T: int) -> Schedule:
        """Copy of the schedule bound to horizon T."""
        return replace(self, horizon=T)


def eta(s: Schedule, t: int) -> float:
    """
    Step size eta_t of the schedule.

    Args:
        s: Schedule
        t: Iteration index, 1 <= t (<= T for horizon-dependent rules)

    Returns:
        eta_t > 0

    Raises:
        HorizonRequired: If the rule needs a horizon and s has none
        ValueError: If t is out of range
    """
    if t < 1:
        raise ValueError("Iterations are numbered from 1")
    rule = _CONVEX_ALIAS.get(s.rule, s.rule)
    T = s.horizon
    if rule in HORIZON_RULES or s.rule in HORIZON_RULES:
        if T is None:
            raise HorizonRequired(f"{s.rule.value} needs a horizon T")
        if t > T:
            raise ValueError(f"Iteration {t} exceeds the horizon {T}")
    T = T or 0
    if rule == Rule.CONSTANT:
        return s.eta
    if rule == Rule.CONVEX_ANYTIME:
        return min(_half_inverse(s.L), s.eta / math.sqrt(t))
    if rule == Rule.CONVEX_FIXED:
        return min(_half_inverse(s.L), s.eta / math.sqrt(T))
    if rule == Rule.ZAMANI:
        return s.eta * (T - t + 1) / T ** 1.5
    if rule == Rule.STRC_F_ANYTIME_1:
        return 1.0 / (s.mu_f * (t + 2.0 * s.kappa_f))
    if rule == Rule.STRC_F_ANYTIME_2:
        return 2.0 / (s.mu_f * (t + 1.0 + 4.0 * s.kappa_f))
    if rule == Rule.STRC_F_KNOWN_PIECEWISE:
        tau = math.ceil(T / 2)
        if t == 1:
            return 1.0 / (s.mu_f * (1.0 + 2.0 * s.kappa_f))
        if t <= tau:
            return 1.0 / (s.mu_f * (s.eta + 2.0 * s.kappa_f))
        return 2.0 / (s.mu_f * (t - tau + 2.0 + 4.0 * s.kappa_f))
    if rule == Rule.STRC_H_ANYTIME:
        return 2.0 / (s.mu_h * (t + 4.0 * s.kappa_h))
    if rule == Rule.STRC_H_KNOWN_PIECEWISE:
        tau = math.ceil(T / 2)
        if t <= tau:
            return 1.0 / (s.mu_h * (s.eta + 2.0 * s.kappa_h))
        return 2.0 / (s.mu_h * (t - tau + 4.0 * s.kappa_h))
    assert s.p is not None
    p = s.p
    if rule == Rule.HEAVY_ANYTIME:
        return min(s.eta_star / t ** ((2.0 - p) / p), s.eta / t ** (1.0 / p))
    if rule == Rule.HEAVY_FIXED:
        return min(s.eta_star / T ** ((2.0 - p) / p), s.eta / T ** (1.0 / p))
    return (s.eta * (T - t + 1) ** (1.0 / (p - 1.0))
            / T ** ((2.0 * p - 1.0) / (p * (p - 1.0))))


def _half_inverse(lipschitz: float) -> float:
    return 1.0 / (2.0 * lipschitz) if lipschitz > 0 else float("inf")


def eta_sequence(s: Schedule, T: int) -> np.ndarray:
    """eta_1, ..., eta_T as an array (index 0 holds eta_1)."""
    if T < 1:
        raise ValueError("Horizon must be a positive integer")
    bound = s if s.rule not in HORIZON_RULES or s.horizon == T else s.with_horizon(T)
    return np.array([eta(bound, t) for t in range(1, T + 1)])


def check_step_cap(s: Schedule, T: int) -> None:
    """
    Verify eta_t <= 1 / (2L v mu_f) and eta_t finite over the horizon.

    Raises:
        StepTooLarge: If some eta_t exceeds the cap or is not finite
    """
    steps = eta_sequence(s, T)
    if not np.all(np.isfinite(steps)) or np.any(steps <= 0):
        raise StepTooLarge(f"{s.rule.value} produces a non-finite or non-positive step")
    worst = int(np.argmax(steps))
    if steps[worst] > s.step_cap * (1.0 + STEP_TOL):
        raise StepTooLarge(
            f"eta_{worst + 1} = {steps[worst]:.6g} exceeds 1/(2L v mu_f) = {s.step_cap:.6g}"
        )


@dataclass(frozen=True, eq=False)
class AnalysisSequences:
    """
    gamma_t, v_t and Gamma_t of a schedule over a horizon.

    Arrays indexed from 0 hold t = 1..T, except v which holds t = 0..T.

    Attributes:
        eta: Step sizes
        log_gamma: ln gamma_t
        log_tail: ln sum_{s >= t} gamma_s
        v: Normalized tail weights gamma_T / sum_{s >= max(t, 1)} gamma_s
        mu_f: Strong convexity of f the sequences were built with
        mu_h: Strong convexity of h the sequences were built with
    """

    eta: np.ndarray
    log_gamma: np.ndarray
    log_tail: np.ndarray
    v: np.ndarray
    mu_f: float
    mu_h: float

    @property
    def T(self) -> int:
        """Horizon."""
        return int(self.eta.size)

    @property
    def gamma(self) -> np.ndarray:
        """gamma_t; may overflow to inf for long known-T strongly convex runs."""
        return np.exp(self.log_gamma)

    @property
    def Gamma(self) -> np.ndarray:
        """Running product Gamma_t = gamma_t / eta_t."""
        return np.exp(self.log_gamma - np.log(self.eta))


def analysis_sequences(s: Schedule, mu_f: float, mu_h: float, T: int) -> AnalysisSequences:
    """
    Build gamma_t = eta_t * prod_{s=2}^t (1 + mu_h eta_{s-1}) / (1 - mu_f eta_s) and v_t.

    Args:
        s: Schedule
        mu_f: Strong convexity of f
        mu_h: Strong convexity of h
        T: Horizon, >= 1

    Returns:
        The sequences

    Raises:
        StepTooLarge: If some eta_t exceeds 1 / (2L v mu_f) or mu_f * eta_t >= 1 for t >= 2
    """
    steps = eta_sequence(s, T)
    cap = 1.0 / max(2.0 * s.L, mu_f) if max(s.L, mu_f) > 0 else float("inf")
    if not np.all(np.isfinite(steps)) or np.any(steps > cap * (1.0 + STEP_TOL)):
        raise StepTooLarge("Step sizes exceed 1/(2L v mu_f)")
    if T > 1 and np.any(mu_f * steps[1:] >= 1.0):
        raise StepTooLarge("mu_f * eta_t must stay below 1 for t >= 2")
    increments = np.log1p(mu_h * steps[:-1]) - np.log1p(-mu_f * steps[1:])
    log_gamma = np.log(steps) + np.concatenate([[0.0], np.cumsum(increments)])
    log_tail = np.logaddexp.accumulate(log_gamma[::-1])[::-1]
    v = np.exp(log_gamma[-1] - np.concatenate([[log_tail[0]], log_tail]))
    v[-1] = 1.0
    return AnalysisSequences(steps, log_gamma, log_tail, v, float(mu_f), float(mu_h))


def c_delta_p(delta: float, p: float) -> float:
    """
    The constant C(delta, p) of the sub-Weibull high-probability bound.

    Args:
        delta: Failure probability in (0, 1)
        p: Tail exponent in (0, 2], where p = 2 returns inf

    Returns:
        C(delta, p)

    Raises:
        DomainError: If delta or p is out of range
    """
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    if p == 2.0:
        return float("inf")
    if not 0.0 < p < 2.0:
        raise DomainError("p must lie in (0, 2)")
    lead = max(2.0 * math.e / p, math.e * math.log(2.0 * math.e / delta)) ** (2.0 / p)
    if p >= 1.0:
        log4 = math.log(4.0 / delta)
        return lead + 16.0 * (6.0 * log4 + log4 ** 2)
    inner = math.log(4.0 * (3.0 + 2.0 * (3.0 / p) ** (2.0 / p)) / delta)
    return lead + 64.0 * max(1.0, inner ** ((p + 2.0) / p)) / math.log(2.0) ** (2.0 / p)


def recommended_eta(rule: Rule, D: Optional[float], L: float = 0.0, M: float = 0.0,
                    sigma: float = 0.0, T: Optional[int] = None,
                    delta: Optional[float] = None, p: Optional[float] = None,
                    multiplier: float = 1.0) -> tuple[float, float]:
    """
    Theory-driven (eta, eta_star) with every hidden constant set to 1.

    Known-horizon rules divide D by ln T. A failure probability delta selects
    the high-probability tunings: sigma^2 ln(1/delta) for the convex rules and
    sigma^2 C(delta, p) for the sub-Weibull ones. Strongly convex rules need no
    tuning and return the default piecewise eta.

    Args:
        rule: Step-size rule
        D: Bregman distance D_psi(x*, x^1)
        L: Smoothness constant
        M: Non-smoothness constant
        sigma: Noise level
        T: Horizon
        delta: Failure probability
        p: Tail exponent
        multiplier: Factor applied to both outputs

    Returns:
        (eta, eta_star); eta_star is inf unless the rule is heavy-tailed with L > 0

    Raises:
        MissingConstant: If D, T, delta or p is needed but absent
    """
    if rule in STRONG_F_RULES or rule in STRONG_H_RULES:
        return DEFAULT_PIECEWISE_ETA, float("inf")
    if D is None:
        raise MissingConstant(f"{rule.value} tuning needs D_psi(x*, x^1)")
    known_t = rule in (Rule.CONVEX_FIXED, Rule.HEAVY_FIXED, Rule.SUBWEIBULL_FIXED)
    if known_t and T is None:
        raise MissingConstant(f"{rule.value} tuning needs the horizon T")
    distance = D / math.log(T) if known_t and T is not None and T > 1 else D
    if rule in HEAVY_RULES:
        if p is None:
            raise MissingConstant("Heavy-tailed tuning needs p")
        eta_star = distance ** ((2.0 - p) / p) / L if L > 0 else float("inf")
        noise = M ** p + sigma ** p
        step = (distance / noise) ** (1.0 / p) if noise > 0 else float("inf")
        return multiplier * step, multiplier * eta_star
    if rule in SUBWEIBULL_RULES:
        if delta is None or p is None:
            raise MissingConstant("Sub-Weibull tuning needs delta and p")
        noise = M ** 2 + sigma ** 2 * c_delta_p(delta, p)
    elif delta is not None:
        if not 0.0 < delta < 1.0:
            raise DomainError("delta must lie in (0, 1)")
        noise = M ** 2 + sigma ** 2 * math.log(1.0 / delta)
    else:
        noise = M ** 2 + sigma ** 2
    step = math.sqrt(distance / noise) if noise > 0 else float("inf")
    return multiplier * step, float("inf")


def dump_schedule(s: Schedule, T: int) -> pd.DataFrame:
    """
    Audit table of a schedule: one row per t with eta_t, gamma_t, Gamma_t and v_t.

    The row t = 0 carries only v_0.
    """
    seq = analysis_sequences(s, s.mu_f, s.mu_h, T)
    frame = pd.DataFrame({
        "t": np.arange(0, T + 1),
        "eta": np.concatenate([[np.nan], seq.eta]),
        "gamma": np.concatenate([[np.nan], seq.gamma]),
        "Gamma": np.concatenate([[np.nan], seq.Gamma]),
        "v": seq.v,
    })
    logger.debug("dumped %s over T=%d", s.rule.value, T)
    return frame
