"""
Composite test objectives F = f + h with known constants and minimizers.

This module provides CompositeRegularizer and ProblemInstance, factories for
every objective family, exact (sub)gradient and gap oracles, random-pair
certification of the declared constants, and a registry addressable by
string ids such as "quad_l1_d10".
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp, softmax

from src.errors import InfeasiblePoint, UnsupportedCombination
from src.geometry import Domain, MirrorMap, bregman, supported
from src.kinds import DomainKind, FunctionKind, MirrorKind, RegularizerKind

logger = logging.getLogger(__name__)

CERTIFY_TOL = 1e-10


@dataclass(frozen=True)
class CompositeRegularizer:
    """
    The term h handled exactly inside the prox step.

    Attributes:
        kind: zero, l1 (lam * ||x||_1) or quadratic ((lam/2) * ||x||_2^2)
        lam: Weight lambda >= 0
    """

    kind: RegularizerKind = RegularizerKind.ZERO
    lam: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.kind, RegularizerKind):
            raise TypeError(f"Expected RegularizerKind but got {type(self.kind)}")
        if self.lam < 0:
            raise ValueError("Regularizer weight must be non-negative")
        if self.kind == RegularizerKind.ZERO and self.lam != 0:
            raise ValueError("The zero regularizer takes no weight")

    def value(self, x: np.ndarray) -> float:
        """h(x)."""
        if self.kind == RegularizerKind.L1:
            return self.lam * float(np.sum(np.abs(x)))
        if self.kind == RegularizerKind.QUADRATIC:
            return 0.5 * self.lam * float(x @ x)
        return 0.0

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """A subgradient of h, taking 0 at the kinks of the l1 norm."""
        if self.kind == RegularizerKind.L1:
            return self.lam * np.sign(x)
        if self.kind == RegularizerKind.QUADRATIC:
            return self.lam * x
        return np.zeros_like(x)

    def directional_derivative(self, x: np.ndarray, d: np.ndarray) -> float:
        """h'(x; d)."""
        if self.kind == RegularizerKind.L1:
            return self.lam * _abs_directional(x, d)
        if self.kind == RegularizerKind.QUADRATIC:
            return self.lam * float(x @ d)
        return 0.0

    def strong_convexity(self, mirror: MirrorMap) -> float:
        """mu_h relative to the mirror map: lam for quadratic h under euclidean, else 0."""
        if self.kind == RegularizerKind.QUADRATIC and mirror.kind == MirrorKind.EUCLIDEAN:
            return self.lam
        return 0.0


def _abs_directional(u: np.ndarray, d: np.ndarray) -> float:
    """Directional derivative of ||u||_1 at u in direction d."""
    return float(np.sum(np.where(u == 0, np.abs(d), np.sign(u) * d)))


def _huber(u: np.ndarray, width: float) -> np.ndarray:
    a = np.abs(u)
    return np.where(a <= width, u * u / (2.0 * width), a - 0.5 * width)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """
    A composite objective with exact constants and optimum.

    Build instances with the make_* factories; they compute x_star and F_star
    analytically and derive (L, M, mu_f, mu_h) for the instance's norm.

    Attributes:
        name: Registry id or free label
        f_kind: Family of f
        h: Composite regularizer
        domain: Feasible set
        mirror: Mirror map
        L: Smoothness constant of Assumption 3
        M: Non-smoothness constant of Assumption 3
        mu_f: Relative strong convexity of f
        mu_h: Relative strong convexity of h
        x_star: Known minimizer
        F_star: F(x_star)
        center: Shift vector c of f (cost vector for linear f)
        curvature: Diagonal of A for quadratic families
        weight: Coefficient M' of the absolute-value families
        width: Huber smoothing width
        default_start: Starting point used when a config says "default"
    """

    name: str
    f_kind: FunctionKind
    h: CompositeRegularizer
    domain: Domain
    mirror: MirrorMap
    L: float
    M: float
    mu_f: float
    mu_h: float
    x_star: np.ndarray
    F_star: float
    center: np.ndarray
    curvature: Optional[np.ndarray] = None
    weight: float = 0.0
    width: float = 0.1
    default_start: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        if min(self.L, self.M, self.mu_f, self.mu_h) < 0:
            raise ValueError("Problem constants must be non-negative")
        if self.mu_f > 0 and self.mu_h > 0:
            raise ValueError("At most one of mu_f, mu_h may be nonzero")
        if self.mu_f > 0 and self.mirror.kind != MirrorKind.EUCLIDEAN:
            raise UnsupportedCombination("mu_f > 0 is only shipped under the euclidean mirror")
        if not self.domain.contains(self.x_star, tol=1e-9):
            raise InfeasiblePoint("x_star lies outside the domain")
        if not supported(self.mirror, self.domain, self.h):
            raise UnsupportedCombination("No exact prox for this instance")

    @property
    def dimension(self) -> int:
        """Ambient dimension d."""
        return self.domain.dimension

    @property
    def kappa_f(self) -> float:
        """L / mu_f, defined as 0 when L = 0."""
        return _condition(self.L, self.mu_f)

    @property
    def kappa_h(self) -> float:
        """L / mu_h, defined as 0 when L = 0."""
        return _condition(self.L, self.mu_h)

    def f_value(self, x: np.ndarray) -> float:
        """f(x)."""
        u = x - self.center
        if self.f_kind == FunctionKind.QUADRATIC:
            return 0.5 * float(np.sum(self.curvature * u * u))
        if self.f_kind == FunctionKind.HUBERIZED_ABS:
            return self.weight * float(np.sum(_huber(u, self.width)))
        if self.f_kind == FunctionKind.ABS_SUM:
            return self.weight * float(np.sum(np.abs(u)))
        if self.f_kind == FunctionKind.LOG_SUM_EXP:
            return float(logsumexp(u))
        if self.f_kind == FunctionKind.LINEAR:
            return float(self.center @ x)
        return (0.5 * float(np.sum(self.curvature * u * u))
                + self.weight * float(np.sum(np.abs(u))))

    def value(self, x: np.ndarray) -> float:
        """F(x) = f(x) + h(x)."""
        return self.f_value(x) + self.h.value(x)

    def f_directional(self, x: np.ndarray, d: np.ndarray) -> float:
        """f'(x; d), exact at kinks."""
        u = x - self.center
        if self.f_kind in (FunctionKind.ABS_SUM, FunctionKind.QUADRATIC_ABS):
            smooth = 0.0
            if self.f_kind == FunctionKind.QUADRATIC_ABS:
                smooth = float(np.sum(self.curvature * u * d))
            return smooth + self.weight * _abs_directional(u, d)
        return float(true_subgradient(self, x) @ d)


def _condition(lipschitz: float, mu: float) -> float:
    if lipschitz == 0:
        return 0.0
    return lipschitz / mu if mu > 0 else float("inf")


def true_subgradient(p: ProblemInstance, x: np.ndarray) -> np.ndarray:
    """
    An element of the subdifferential of f at x.

    Kinks of absolute values take the 0 subgradient, which is always valid.

    Args:
        p: Problem instance
        x: Feasible point

    Returns:
        g in df(x)
    """
    u = x - p.center
    if p.f_kind == FunctionKind.QUADRATIC:
        return p.curvature * u
    if p.f_kind == FunctionKind.HUBERIZED_ABS:
        return p.weight * np.clip(u / p.width, -1.0, 1.0)
    if p.f_kind == FunctionKind.ABS_SUM:
        return p.weight * np.sign(u)
    if p.f_kind == FunctionKind.LOG_SUM_EXP:
        return softmax(u)
    if p.f_kind == FunctionKind.LINEAR:
        return p.center.copy()
    return p.curvature * u + p.weight * np.sign(u)


def objective_gap(p: ProblemInstance, x: np.ndarray) -> float:
    """
    Function value gap F(x) - F(x*).

    Args:
        p: Problem instance
        x: Feasible point

    Returns:
        F(x) - F_star
    """
    return p.value(x) - p.F_star


def directional_derivative(p: ProblemInstance, x: np.ndarray, d: np.ndarray) -> float:
    """Exact F'(x; d) = f'(x; d) + h'(x; d)."""
    return p.f_directional(x, d) + p.h.directional_derivative(x, d)


@dataclass(frozen=True)
class ConstantsReport:
    """
    Random-pair certification of (L, M, mu_f, mu_h).

    Attributes:
        max_violation: max over pairs of lhs - rhs of the (L, M) upper inequality
        upper_slack: min over pairs of rhs - lhs of the (L, M) upper inequality
        lower_slack_f: min slack of mu_f * D_psi <= f(x) - f(y) - <g, x - y>
        lower_slack_h: min slack of mu_h * D_psi <= h(x) - h(y) - <s, x - y>
        trials: Number of pairs
        passed: Whether every slack is >= -1e-10
    """

    max_violation: float
    upper_slack: float
    lower_slack_f: float
    lower_slack_h: float
    trials: int
    passed: bool


def _sample_pairs(p: ProblemInstance, trials: int,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    xs = p.domain.sample(rng, trials, around=p.x_star, scale=2.0)
    ys = p.domain.sample(rng, trials, around=p.x_star, scale=2.0)
    if p.mirror.kind == MirrorKind.ENTROPIC_SIMPLEX:
        ys = np.maximum(ys, 1e-300)
    return xs, ys


def certify_constants(p: ProblemInstance, trials: int, rng_seed: int) -> ConstantsReport:
    """
    Spot-check Assumptions 2 and 3 on random feasible pairs.

    Args:
        p: Problem instance
        trials: Number of pairs, >= 1
        rng_seed: Seed of the pair sampler

    Returns:
        The certification report

    Raises:
        ValueError: If trials < 1
    """
    if trials < 1:
        raise ValueError("Trials must be greater than 0")
    rng = np.random.default_rng(rng_seed)
    xs, ys = _sample_pairs(p, trials, rng)
    upper = lower_f = lower_h = np.inf
    for x, y in zip(xs, ys):
        dist = p.mirror.norm(x - y)
        breg = bregman(p.mirror, x, y)
        f_excess = p.f_value(x) - p.f_value(y) - float(true_subgradient(p, y) @ (x - y))
        h_excess = p.h.value(x) - p.h.value(y) - float(p.h.gradient(y) @ (x - y))
        upper = min(upper, 0.5 * p.L * dist ** 2 + p.M * dist - f_excess)
        lower_f = min(lower_f, f_excess - p.mu_f * breg)
        lower_h = min(lower_h, h_excess - p.mu_h * breg)
    passed = min(upper, lower_f, lower_h) >= -CERTIFY_TOL
    if not passed:
        logger.warning("constants of %s failed certification (slacks %.3e, %.3e, %.3e)",
                       p.name, upper, lower_f, lower_h)
    return ConstantsReport(max(0.0, -upper), float(upper), float(lower_f), float(lower_h),
                           trials, bool(passed))


@dataclass(frozen=True)
class MinimizerReport:
    """
    Random-point check that x_star is optimal.

    Attributes:
        min_gap: min over sampled x of F(x) - F_star
        min_directional: min over sampled x of F'(x_star; x - x_star)
        trials: Number of sampled points
        passed: Whether min_gap >= -1e-12 and min_directional >= -1e-8
    """

    min_gap: float
    min_directional: float
    trials: int
    passed: bool


def verify_minimizer(p: ProblemInstance, trials: int, rng_seed: int) -> MinimizerReport:
    """
    Check Assumption 1 and first-order optimality of x_star on random points.

    Args:
        p: Problem instance
        trials: Number of sampled points, >= 1
        rng_seed: Seed of the sampler

    Returns:
        The optimality report
    """
    if trials < 1:
        raise ValueError("Trials must be greater than 0")
    rng = np.random.default_rng(rng_seed)
    xs = p.domain.sample(rng, trials, around=p.x_star, scale=2.0)
    gaps = [objective_gap(p, x) for x in xs]
    slopes = [directional_derivative(p, p.x_star, x - p.x_star) for x in xs]
    min_gap, min_slope = float(min(gaps)), float(min(slopes))
    return MinimizerReport(min_gap, min_slope, trials,
                           bool(min_gap >= -1e-12 and min_slope >= -1e-8))


def _default_mirror(dimension: int, mirror: Optional[MirrorMap]) -> MirrorMap:
    return MirrorMap(MirrorKind.EUCLIDEAN, dimension) if mirror is None else mirror


def _norm_factor(mirror: MirrorMap, dimension: int) -> float:
    """Bound on ||u||_1 in units of the mirror norm of u."""
    return 1.0 if mirror.kind == MirrorKind.ENTROPIC_SIMPLEX else float(np.sqrt(dimension))


def _separable(domain: Domain) -> bool:
    return domain.kind in (DomainKind.ALL_SPACE, DomainKind.BOX)


def _clip(domain: Domain, x: np.ndarray) -> np.ndarray:
    # exact for separable 1-d convex pieces on a box
    return domain.project(x) if domain.kind == DomainKind.BOX else x


def _finish(name: str, f_kind: FunctionKind, h: CompositeRegularizer, domain: Domain,
            mirror: MirrorMap, constants: tuple[float, float, float, float],
            x_star: np.ndarray, center: np.ndarray, start: Optional[np.ndarray],
            **family: object) -> ProblemInstance:
    L, M, mu_f, mu_h = constants
    draft = ProblemInstance(
        name=name, f_kind=f_kind, h=h, domain=domain, mirror=mirror, L=L, M=M,
        mu_f=mu_f, mu_h=mu_h, x_star=x_star, F_star=0.0, center=center,
        default_start=domain.interior_point() if start is None else np.asarray(start, float),
        **family,  # type: ignore[arg-type]
    )
    F_star = draft.value(x_star)
    return ProblemInstance(
        name=name, f_kind=f_kind, h=h, domain=domain, mirror=mirror, L=L, M=M,
        mu_f=mu_f, mu_h=mu_h, x_star=x_star, F_star=F_star, center=center,
        default_start=draft.default_start, **family,  # type: ignore[arg-type]
    )


def make_quadratic(curvature: np.ndarray, center: np.ndarray,
                   h: Optional[CompositeRegularizer] = None,
                   domain: Optional[Domain] = None, mirror: Optional[MirrorMap] = None,
                   strongly_convex: bool = False, lipschitz_on_domain: bool = False,
                   name: str = "quadratic", start: Optional[np.ndarray] = None
                   ) -> ProblemInstance:
    """
    f(x) = 1/2 (x - c)^T A (x - c) with diagonal A.

    Separable domains (all_space, box) accept any regularizer; the ball and
    the simplex need isotropic A and a zero or quadratic h.

    Args:
        curvature: Diagonal of A, entries >= 0
        center: Shift c
        h: Regularizer (zero by default)
        domain: Feasible set (R^d by default)
        mirror: Mirror map (euclidean by default)
        strongly_convex: Declare mu_f = min(A)
        lipschitz_on_domain: Declare (L, M) = (0, max(A) * diam / 2), bounded domains only
        name: Label of the instance
        start: Starting point, the domain center by default

    Raises:
        ValueError: If the declared structure is inconsistent
        UnsupportedCombination: If no closed-form optimum exists
    """
    a = np.asarray(curvature, dtype=float)
    c = np.asarray(center, dtype=float)
    d = c.size
    h = CompositeRegularizer() if h is None else h
    domain = Domain.all_space(d) if domain is None else domain
    mirror = _default_mirror(d, mirror)
    if a.shape != c.shape or np.any(a < 0):
        raise ValueError("Curvature must be non-negative and match the center")
    if _separable(domain):
        if h.kind == RegularizerKind.L1:
            safe = np.where(a > 0, a, 1.0)
            shrunk = np.sign(c) * np.maximum(np.abs(c) - h.lam / safe, 0.0)
            unconstrained = np.where(a > 0, shrunk, 0.0)
        else:
            lam = h.lam if h.kind == RegularizerKind.QUADRATIC else 0.0
            denom = a + lam
            unconstrained = np.where(denom > 0, a * c / np.where(denom > 0, denom, 1.0), c)
        x_star = _clip(domain, unconstrained)
    else:
        if not np.allclose(a, a[0]) or a[0] <= 0 or h.kind == RegularizerKind.L1:
            raise UnsupportedCombination("Non-separable domains need isotropic A and no l1 term")
        lam = h.lam if h.kind == RegularizerKind.QUADRATIC else 0.0
        x_star = domain.project(a[0] * c / (a[0] + lam))
    mu_h = h.strong_convexity(mirror)
    mu_f = float(np.min(a)) if strongly_convex else 0.0
    if mu_f > 0 and mu_h > 0:
        raise ValueError("A strongly convex f cannot be paired with a strongly convex h")
    if lipschitz_on_domain:
        order = 1 if mirror.kind == MirrorKind.ENTROPIC_SIMPLEX else 2
        diameter = domain.diameter(order)
        if not np.isfinite(diameter):
            raise ValueError("Lipschitz certification needs a bounded domain")
        L, M = 0.0, float(np.max(a)) * diameter / 2.0
    else:
        L, M = float(np.max(a)), 0.0
    return _finish(name, FunctionKind.QUADRATIC, h, domain, mirror, (L, M, mu_f, mu_h),
                   x_star, c, start, curvature=a)


def make_huberized_abs(center: np.ndarray, weight: float = 1.0, width: float = 0.1,
                       domain: Optional[Domain] = None, mirror: Optional[MirrorMap] = None,
                       name: str = "huberized_abs", start: Optional[np.ndarray] = None
                       ) -> ProblemInstance:
    """
    f(x) = M' * sum_i huber_width(x_i - c_i), an (M'/width, 0)-smooth instance.

    Raises:
        ValueError: If width or weight is not positive
        UnsupportedCombination: If the domain is not separable
    """
    if width <= 0 or weight <= 0:
        raise ValueError("Huber width and weight must be greater than 0")
    c = np.asarray(center, dtype=float)
    domain = Domain.all_space(c.size) if domain is None else domain
    mirror = _default_mirror(c.size, mirror)
    if not _separable(domain):
        raise UnsupportedCombination("Huberized instances need a separable domain")
    return _finish(name, FunctionKind.HUBERIZED_ABS, CompositeRegularizer(), domain, mirror,
                   (weight / width, 0.0, 0.0, 0.0), _clip(domain, c), c, start,
                   weight=float(weight), width=float(width))


def make_abs_sum(center: np.ndarray, weight: float = 1.0,
                 h: Optional[CompositeRegularizer] = None, domain: Optional[Domain] = None,
                 mirror: Optional[MirrorMap] = None, name: str = "abs_sum",
                 start: Optional[np.ndarray] = None) -> ProblemInstance:
    """
    f(x) = M' * ||x - c||_1, a Lipschitz instance with (L, M) = (0, 2 M' sqrt(d)).

    Under the entropic geometry the l1 norm is the primal norm and M = 2 M'.

    Raises:
        UnsupportedCombination: If the domain is not separable
    """
    c = np.asarray(center, dtype=float)
    h = CompositeRegularizer() if h is None else h
    domain = Domain.all_space(c.size) if domain is None else domain
    mirror = _default_mirror(c.size, mirror)
    if not _separable(domain):
        raise UnsupportedCombination("Absolute-value instances need a separable domain")
    if h.kind == RegularizerKind.L1:
        unconstrained = c if weight >= h.lam else np.zeros_like(c)
    elif h.kind == RegularizerKind.QUADRATIC and h.lam > 0:
        unconstrained = np.clip(c, -weight / h.lam, weight / h.lam)
    else:
        unconstrained = c
    M = 2.0 * weight * _norm_factor(mirror, c.size)
    return _finish(name, FunctionKind.ABS_SUM, h, domain, mirror,
                   (0.0, M, 0.0, h.strong_convexity(mirror)), _clip(domain, unconstrained),
                   c, start, weight=float(weight))


def make_quadratic_abs(curvature: np.ndarray, center: np.ndarray, weight: float,
                       domain: Optional[Domain] = None, mirror: Optional[MirrorMap] = None,
                       name: str = "quadratic_abs", start: Optional[np.ndarray] = None
                       ) -> ProblemInstance:
    """f(x) = 1/2 (x - c)^T A (x - c) + M' ||x - c||_1, (L, M)-smooth with both positive."""
    a = np.asarray(curvature, dtype=float)
    c = np.asarray(center, dtype=float)
    domain = Domain.all_space(c.size) if domain is None else domain
    mirror = _default_mirror(c.size, mirror)
    if not _separable(domain):
        raise UnsupportedCombination("Quadratic-abs instances need a separable domain")
    M = 2.0 * weight * _norm_factor(mirror, c.size)
    return _finish(name, FunctionKind.QUADRATIC_ABS, CompositeRegularizer(), domain, mirror,
                   (float(np.max(a)), M, 0.0, 0.0), _clip(domain, c), c, start,
                   curvature=a, weight=float(weight))


def make_log_sum_exp(center: np.ndarray, mirror: Optional[MirrorMap] = None,
                     name: str = "log_sum_exp", start: Optional[np.ndarray] = None
                     ) -> ProblemInstance:
    """
    f(x) = log sum_i exp(x_i - c_i) on the simplex, a (1, 0)-smooth instance.

    The minimizer c - mean(c) + 1/d equalizes the softmax weights.

    Raises:
        ValueError: If that point leaves the simplex
    """
    c = np.asarray(center, dtype=float)
    d = c.size
    x_star = c - np.mean(c) + 1.0 / d
    if np.any(x_star < 0):
        raise ValueError("Center too spread: the minimizer would leave the simplex")
    mirror = MirrorMap(MirrorKind.ENTROPIC_SIMPLEX, d) if mirror is None else mirror
    return _finish(name, FunctionKind.LOG_SUM_EXP, CompositeRegularizer(), Domain.simplex(d),
                   mirror, (1.0, 0.0, 0.0, 0.0), x_star, c, start)


def make_linear(cost: np.ndarray, domain: Optional[Domain] = None,
                mirror: Optional[MirrorMap] = None, name: str = "linear",
                start: Optional[np.ndarray] = None) -> ProblemInstance:
    """
    f(x) = <c, x> on the simplex or a box, a (0, 0)-smooth instance.

    Raises:
        UnsupportedCombination: If the domain is neither simplex nor box
    """
    c = np.asarray(cost, dtype=float)
    d = c.size
    domain = Domain.simplex(d) if domain is None else domain
    if domain.kind == DomainKind.SIMPLEX:
        x_star = np.zeros(d)
        x_star[int(np.argmin(c))] = 1.0
        default_mirror = MirrorMap(MirrorKind.ENTROPIC_SIMPLEX, d)
    elif domain.kind == DomainKind.BOX:
        assert domain.lower is not None and domain.upper is not None
        x_star = np.where(c < 0, domain.upper, domain.lower)
        default_mirror = MirrorMap(MirrorKind.EUCLIDEAN, d)
    else:
        raise UnsupportedCombination("Linear instances need a simplex or a box")
    mirror = default_mirror if mirror is None else mirror
    return _finish(name, FunctionKind.LINEAR, CompositeRegularizer(), domain, mirror,
                   (0.0, 0.0, 0.0, 0.0), x_star, c, start)


def _quad(d: int) -> ProblemInstance:
    return make_quadratic(np.linspace(0.5, 1.5, d) if d > 1 else np.ones(1), np.ones(d),
                          name=f"quad_d{d}")


def _quad_strong(d: int) -> ProblemInstance:
    return make_quadratic(np.linspace(0.5, 1.5, d) if d > 1 else np.ones(1), np.ones(d),
                          strongly_convex=True, name=f"quad_strong_d{d}")


def _quad_l1(d: int) -> ProblemInstance:
    return make_quadratic(np.ones(d), np.linspace(-2.0, 2.0, d) if d > 1 else 2 * np.ones(1),
                          h=CompositeRegularizer(RegularizerKind.L1, 0.5), name=f"quad_l1_d{d}")


def _quad_spectrum(d: int) -> ProblemInstance:
    # log-spaced curvatures down to 1e-5 make plain gradient steps sublinear
    return make_quadratic(np.geomspace(1e-5, 1.0, d) if d > 1 else np.ones(1), np.ones(d),
                          name=f"quad_spectrum_d{d}")


def _quad_ridge(d: int) -> ProblemInstance:
    return make_quadratic(np.ones(d), np.ones(d),
                          h=CompositeRegularizer(RegularizerKind.QUADRATIC, 1.0),
                          name=f"quad_ridge_d{d}")


def _quad_ball_lipschitz(d: int) -> ProblemInstance:
    return make_quadratic(np.ones(d), np.full(d, 0.5 / np.sqrt(d)),
                          domain=Domain.l2_ball(d, 2.0), strongly_convex=True,
                          lipschitz_on_domain=True, name=f"quad_ball_lipschitz_d{d}")


def _quad_simplex(d: int) -> ProblemInstance:
    center = np.zeros(d)
    center[0] = 2.0
    return make_quadratic(np.ones(d), center, domain=Domain.simplex(d),
                          name=f"quad_simplex_d{d}")


def _quad_puniform(d: int) -> ProblemInstance:
    return make_quadratic(np.ones(d), np.ones(d), mirror=MirrorMap(MirrorKind.P_UNIFORM, d, 1.5),
                          name=f"quad_puniform_d{d}")


def _abs(d: int) -> ProblemInstance:
    return make_abs_sum(np.full(d, 0.5), weight=1.0 / np.sqrt(d), name=f"abs_d{d}")


def _abs_l1(d: int) -> ProblemInstance:
    return make_abs_sum(np.full(d, 0.5), weight=1.0,
                        h=CompositeRegularizer(RegularizerKind.L1, 0.5), name=f"abs_l1_d{d}")


def _abs_puniform(d: int) -> ProblemInstance:
    return make_abs_sum(np.full(d, 0.5), weight=1.0 / np.sqrt(d),
                        mirror=MirrorMap(MirrorKind.P_UNIFORM, d, 1.5), name=f"abs_puniform_d{d}")


def _huber_problem(d: int) -> ProblemInstance:
    return make_huberized_abs(np.ones(d), weight=1.0, width=0.1, name=f"huber_d{d}")


def _quad_abs(d: int) -> ProblemInstance:
    return make_quadratic_abs(np.ones(d), np.ones(d), weight=0.5 / np.sqrt(d),
                              name=f"quad_abs_d{d}")


def _lse_simplex(d: int) -> ProblemInstance:
    return make_log_sum_exp(np.linspace(-1.0, 1.0, d) / (2.0 * d), name=f"lse_simplex_d{d}")


def _linear_simplex(d: int) -> ProblemInstance:
    return make_linear(np.linspace(0.0, 1.0, d), name=f"linear_simplex_d{d}")


REGISTRY: dict[str, Callable[[int], ProblemInstance]] = {
    "quad": _quad,
    "quad_strong": _quad_strong,
    "quad_l1": _quad_l1,
    "quad_spectrum": _quad_spectrum,
    "quad_ridge": _quad_ridge,
    "quad_ball_lipschitz": _quad_ball_lipschitz,
    "quad_simplex": _quad_simplex,
    "quad_puniform": _quad_puniform,
    "abs": _abs,
    "abs_l1": _abs_l1,
    "abs_puniform": _abs_puniform,
    "huber": _huber_problem,
    "quad_abs": _quad_abs,
    "lse_simplex": _lse_simplex,
    "linear_simplex": _linear_simplex,
}

_ID_PATTERN = re.compile(r"^(?P<base>[a-z0-9_]+?)_d(?P<dim>\d+)$")


def get_problem(problem_id: str) -> ProblemInstance:
    """
    Build a registered instance from its id, e.g. "quad_l1_d10".

    Args:
        problem_id: Base name followed by _d<dimension>

    Returns:
        The problem instance

    Raises:
        KeyError: If the base name is not registered
        ValueError: If the id carries no dimension suffix
    """
    match = _ID_PATTERN.match(problem_id)
    if match is None:
        raise ValueError(f"Problem id {problem_id!r} must end with _d<dimension>")
    base, dim = match.group("base"), int(match.group("dim"))
    if base not in REGISTRY:
        raise KeyError(f"Unknown problem {base!r}; known: {', '.join(sorted(REGISTRY))}")
    return REGISTRY[base](dim)
