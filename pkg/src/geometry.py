"""
Mirror maps, feasible sets and exact solvers for the composite mirror step.

This module provides the MirrorMap and Domain value types, the Bregman
divergence of each mirror map, and an explicit whitelist of exact solvers for

    argmin_{x in X} h(x) + <g, x - x^t> + D_psi(x, x^t) / eta.

Triples (mirror, domain, h) outside the whitelist are rejected instead of
being solved approximately.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np
from scipy.optimize import bisect, minimize
from scipy.special import rel_entr, softmax, xlogy

from src.errors import InfeasiblePoint, NonInteriorPoint, UnsupportedCombination
from src.kinds import DomainKind, MirrorKind, RegularizerKind

if TYPE_CHECKING:
    from src.problems import CompositeRegularizer

logger = logging.getLogger(__name__)

ENTROPIC_FLOOR = 1e-300
BISECTION_RTOL = 1e-12
BISECTION_MAXITER = 200
FEASIBILITY_TOL = 1e-12

ProxSolver = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class MirrorMap:
    """
    A mirror map psi together with its uniform-convexity degree.

    The euclidean and entropic maps are 1-strongly convex (degree 2) with
    respect to the l2 and l1 norm respectively. The p_uniform map is
    psi(x) = 2^(q-2) * (1/q) * ||x||_2^q with q = p/(p-1), which is uniformly
    convex of degree q with modulus 1/q = (p-1)/p.

    Attributes:
        kind: Which potential psi is
        dimension: Ambient dimension d
        p: Tail exponent in (1, 2); only used by p_uniform
    """

    kind: MirrorKind
    dimension: int
    p: Optional[float] = None

    def __post_init__(self) -> None:
        if not isinstance(self.kind, MirrorKind):
            raise TypeError(f"Expected MirrorKind but got {type(self.kind)}")
        if not isinstance(self.dimension, int) or isinstance(self.dimension, bool):
            raise TypeError("Dimension must be an integer")
        if self.dimension < 1:
            raise ValueError("Dimension must be greater than 0")
        if self.kind == MirrorKind.P_UNIFORM:
            if self.p is None or not 1.0 < self.p < 2.0:
                raise ValueError("p_uniform mirror requires p in (1, 2)")
        elif self.p is not None:
            raise ValueError("p only applies to the p_uniform mirror")

    @property
    def degree(self) -> float:
        """Uniform-convexity degree q."""
        if self.kind == MirrorKind.P_UNIFORM:
            assert self.p is not None
            return self.p / (self.p - 1.0)
        return 2.0

    @property
    def modulus(self) -> float:
        """Constant c with D_psi(x, y) >= c * ||x - y||^q."""
        return 1.0 / self.degree

    @property
    def scale(self) -> float:
        """Leading factor of the p_uniform potential, 1 for the others."""
        if self.kind == MirrorKind.P_UNIFORM:
            return 2.0 ** (self.degree - 2.0)
        return 1.0

    def norm(self, v: np.ndarray) -> float:
        """
        Primal norm this geometry is strongly/uniformly convex in.

        Args:
            v: Vector to measure

        Returns:
            ||v||_1 for the entropic map, ||v||_2 otherwise
        """
        order = 1 if self.kind == MirrorKind.ENTROPIC_SIMPLEX else 2
        return float(np.linalg.norm(v, ord=order))

    def dual_norm(self, v: np.ndarray) -> float:
        """Dual norm: ||v||_inf for the entropic map, ||v||_2 otherwise."""
        order = np.inf if self.kind == MirrorKind.ENTROPIC_SIMPLEX else 2
        return float(np.linalg.norm(v, ord=order))


@dataclass(frozen=True, eq=False)
class Domain:
    """
    A nonempty closed convex feasible set.

    Use the classmethod constructors rather than the raw initializer.

    Attributes:
        kind: Shape of the set
        dimension: Ambient dimension d
        lower: Lower bounds (box only)
        upper: Upper bounds (box only)
        radius: Radius (l2_ball only)
        center: Center (l2_ball only)
    """

    kind: DomainKind
    dimension: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    radius: Optional[float] = None
    center: Optional[np.ndarray] = None

    @classmethod
    def all_space(cls, dimension: int) -> Domain:
        """Return R^d."""
        _check_dimension(dimension)
        return cls(DomainKind.ALL_SPACE, dimension)

    @classmethod
    def box(cls, lower: np.ndarray, upper: np.ndarray) -> Domain:
        """
        Return the box lower <= x <= upper.

        Args:
            lower: Finite lower bounds
            upper: Finite upper bounds, elementwise >= lower

        Raises:
            ValueError: If the bounds are not finite, mismatched or empty
        """
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("Box bounds must be 1-d arrays of the same length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("Box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("Box is empty: some lower bound exceeds its upper bound")
        return cls(DomainKind.BOX, lo.size, lower=lo, upper=hi)

    @classmethod
    def l2_ball(cls, dimension: int, radius: float,
                center: Optional[np.ndarray] = None) -> Domain:
        """
        Return the Euclidean ball of the given radius.

        Raises:
            ValueError: If the radius is not positive
        """
        _check_dimension(dimension)
        if not radius > 0:
            raise ValueError("Ball radius must be greater than 0")
        c = np.zeros(dimension) if center is None else np.asarray(center, dtype=float)
        if c.shape != (dimension,):
            raise ValueError("Ball center has the wrong dimension")
        return cls(DomainKind.L2_BALL, dimension, radius=float(radius), center=c)

    @classmethod
    def simplex(cls, dimension: int) -> Domain:
        """Return the probability simplex in R^d."""
        _check_dimension(dimension)
        return cls(DomainKind.SIMPLEX, dimension)

    def contains(self, x: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
        """
        Membership test with an absolute tolerance.

        Args:
            x: Query point
            tol: Allowed violation

        Returns:
            True if x is feasible up to tol
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,) or not np.all(np.isfinite(x)):
            return False
        if self.kind == DomainKind.BOX:
            assert self.lower is not None and self.upper is not None
            return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))
        if self.kind == DomainKind.L2_BALL:
            assert self.radius is not None
            return bool(np.linalg.norm(x - self.center) <= self.radius + tol)
        if self.kind == DomainKind.SIMPLEX:
            return bool(np.all(x >= -tol) and abs(np.sum(x) - 1.0) <= tol)
        return True

    def project(self, x: np.ndarray) -> np.ndarray:
        """
        Euclidean projection onto the set.

        Args:
            x: Point to project

        Returns:
            The closest feasible point in the l2 norm
        """
        x = np.asarray(x, dtype=float)
        if self.kind == DomainKind.BOX:
            return np.clip(x, self.lower, self.upper)
        if self.kind == DomainKind.L2_BALL:
            assert self.radius is not None and self.center is not None
            offset = x - self.center
            dist = np.linalg.norm(offset)
            if dist <= self.radius:
                return x.copy()
            return self.center + offset * (self.radius / dist)
        if self.kind == DomainKind.SIMPLEX:
            return _project_simplex(x)
        return x.copy()

    def sample(self, rng: np.random.Generator, n: int,
               around: Optional[np.ndarray] = None, scale: float = 1.0) -> np.ndarray:
        """
        Draw n feasible points.

        Unbounded sets are sampled uniformly in a cube of half-width scale
        around the given point (the origin by default).

        Returns:
            Array of shape (n, d)
        """
        d = self.dimension
        if self.kind == DomainKind.BOX:
            return rng.uniform(self.lower, self.upper, size=(n, d))
        if self.kind == DomainKind.L2_BALL:
            assert self.radius is not None
            directions = rng.standard_normal((n, d))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            radii = self.radius * rng.uniform(size=(n, 1)) ** (1.0 / d)
            return self.center + radii * directions
        if self.kind == DomainKind.SIMPLEX:
            return rng.dirichlet(np.ones(d), size=n)
        base = np.zeros(d) if around is None else np.asarray(around, dtype=float)
        return base + rng.uniform(-scale, scale, size=(n, d))

    def interior_point(self) -> np.ndarray:
        """A canonical feasible starting point (center of the set)."""
        if self.kind == DomainKind.BOX:
            assert self.lower is not None and self.upper is not None
            return 0.5 * (self.lower + self.upper)
        if self.kind == DomainKind.L2_BALL:
            assert self.center is not None
            return self.center.copy()
        if self.kind == DomainKind.SIMPLEX:
            return np.full(self.dimension, 1.0 / self.dimension)
        return np.zeros(self.dimension)

    def diameter(self, order: float = 2) -> float:
        """Diameter of the set in the l1 (order=1) or l2 (order=2) norm."""
        if self.kind == DomainKind.BOX:
            assert self.lower is not None and self.upper is not None
            return float(np.linalg.norm(self.upper - self.lower, ord=order))
        if self.kind == DomainKind.L2_BALL:
            assert self.radius is not None
            spread = 2.0 * self.radius
            return spread * np.sqrt(self.dimension) if order == 1 else spread
        if self.kind == DomainKind.SIMPLEX:
            return 2.0 if order == 1 else float(np.sqrt(2.0))
        return float("inf")


@dataclass(frozen=True, eq=False)
class ProxProblem:
    """
    One instance of the composite mirror step.

    Attributes:
        g: Stochastic gradient
        anchor: Current iterate x^t
        eta: Step size, > 0
        h: Composite regularizer handled inside the step
        domain: Feasible set
        mirror: Mirror map
    """

    g: np.ndarray
    anchor: np.ndarray
    eta: float
    h: CompositeRegularizer
    domain: Domain
    mirror: MirrorMap

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValueError("Step size eta must be greater than 0")
        if not self.domain.contains(self.anchor):
            raise InfeasiblePoint("Anchor lies outside the domain")
        if self.mirror.kind == MirrorKind.ENTROPIC_SIMPLEX and np.any(self.anchor <= 0):
            raise NonInteriorPoint("Entropic anchor must have positive coordinates")


def _check_dimension(dimension: int) -> None:
    if not isinstance(dimension, int) or isinstance(dimension, bool):
        raise TypeError("Dimension must be an integer")
    if dimension < 1:
        raise ValueError("Dimension must be greater than 0")


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Sort-based Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = ind[u - css / ind > 0][-1]
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def psi(mirror: MirrorMap, x: np.ndarray) -> float:
    """
    Evaluate the potential psi(x).

    Args:
        mirror: Mirror map
        x: Point in dom(psi)

    Returns:
        psi(x)

    Raises:
        NonInteriorPoint: If an entropic coordinate is negative
    """
    x = np.asarray(x, dtype=float)
    if mirror.kind == MirrorKind.EUCLIDEAN:
        return 0.5 * float(x @ x)
    if mirror.kind == MirrorKind.ENTROPIC_SIMPLEX:
        if np.any(x < 0):
            raise NonInteriorPoint("Entropic potential is undefined for negative coordinates")
        return float(np.sum(xlogy(x, x)))
    q = mirror.degree
    return mirror.scale / q * float(np.linalg.norm(x)) ** q


def grad_psi(mirror: MirrorMap, x: np.ndarray) -> np.ndarray:
    """
    Gradient of the potential.

    Args:
        mirror: Mirror map
        x: Point in the interior of dom(psi)

    Returns:
        x for euclidean, 1 + ln(x) for entropic, and
        2^(q-2) * ||x||^(q-2) * x for p_uniform (0 at the origin)

    Raises:
        NonInteriorPoint: If an entropic coordinate is <= 0
    """
    x = np.asarray(x, dtype=float)
    if mirror.kind == MirrorKind.EUCLIDEAN:
        return x.copy()
    if mirror.kind == MirrorKind.ENTROPIC_SIMPLEX:
        if np.any(x <= 0):
            raise NonInteriorPoint("Entropic gradient needs every coordinate > 0")
        return 1.0 + np.log(x)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        return np.zeros_like(x)
    return mirror.scale * r ** (mirror.degree - 2.0) * x


def bregman(mirror: MirrorMap, x: np.ndarray, y: np.ndarray) -> float:
    """
    Bregman divergence D_psi(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>.

    Args:
        mirror: Mirror map
        x: Feasible point
        y: Point in the interior of dom(psi)

    Returns:
        D_psi(x, y) >= 0

    Raises:
        NonInteriorPoint: If y is not interior (entropic)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if mirror.kind == MirrorKind.EUCLIDEAN:
        diff = x - y
        return 0.5 * float(diff @ diff)
    if mirror.kind == MirrorKind.ENTROPIC_SIMPLEX:
        if np.any(y <= 0):
            raise NonInteriorPoint("Entropic divergence needs y > 0")
        if np.any(x < 0):
            raise NonInteriorPoint("Entropic divergence needs x >= 0")
        return float(np.sum(rel_entr(x, y) - x + y))
    value = psi(mirror, x) - psi(mirror, y) - float(grad_psi(mirror, y) @ (x - y))
    return max(value, 0.0)


def _euclidean_plain(domain: Domain) -> ProxSolver:
    def solve(g: np.ndarray, anchor: np.ndarray, eta: float) -> np.ndarray:
        return domain.project(anchor - eta * g)
    return solve


def _euclidean_l1(domain: Domain, lam: float) -> ProxSolver:
    def solve(g: np.ndarray, anchor: np.ndarray, eta: float) -> np.ndarray:
        v = anchor - eta * g
        shrunk = np.sign(v) * np.maximum(np.abs(v) - eta * lam, 0.0)
        return domain.project(shrunk)
    return solve


def _euclidean_quadratic(domain: Domain, lam: float) -> ProxSolver:
    # isotropic objective, so projecting the unconstrained minimizer is exact
    def solve(g: np.ndarray, anchor: np.ndarray, eta: float) -> np.ndarray:
        return domain.project((anchor - eta * g) / (1.0 + eta * lam))
    return solve


def _entropic_plain() -> ProxSolver:
    def solve(g: np.ndarray, anchor: np.ndarray, eta: float) -> np.ndarray:
        weights = softmax(np.log(anchor) - eta * g)
        return np.maximum(weights, ENTROPIC_FLOOR)
    return solve


def _p_uniform_plain(mirror: MirrorMap) -> ProxSolver:
    q = mirror.degree
    c = mirror.scale

    def solve(g: np.ndarray, anchor: np.ndarray, eta: float) -> np.ndarray:
        dual = grad_psi(mirror, anchor) - eta * g
        target = float(np.linalg.norm(dual))
        if target == 0.0:
            return np.zeros_like(anchor)

        def residual(r: float) -> float:
            return c * r ** (q - 1.0) - target

        hi = 1.0
        while residual(hi) < 0:
            hi *= 2.0
        while residual(hi / 2.0) >= 0:
            hi /= 2.0
        radius = bisect(residual, hi / 2.0, hi, xtol=np.finfo(float).tiny,
                        rtol=BISECTION_RTOL, maxiter=BISECTION_MAXITER)
        return dual * (radius / target)
    return solve


_PLAIN_EUCLIDEAN_DOMAINS = (DomainKind.ALL_SPACE, DomainKind.BOX,
                            DomainKind.L2_BALL, DomainKind.SIMPLEX)
_L1_EUCLIDEAN_DOMAINS = (DomainKind.ALL_SPACE, DomainKind.BOX)


def supported(mirror: MirrorMap, domain: Domain, h: CompositeRegularizer) -> bool:
    """Whether solve_prox has an exact path for the triple."""
    try:
        prox_solver(mirror, domain, h)
    except UnsupportedCombination:
        return False
    return True


def prox_solver(mirror: MirrorMap, domain: Domain, h: CompositeRegularizer) -> ProxSolver:
    """
    Resolve the exact solver for a (mirror, domain, h) triple once.

    Args:
        mirror: Mirror map
        domain: Feasible set
        h: Composite regularizer

    Returns:
        A callable (g, anchor, eta) -> x^{t+1}

    Raises:
        UnsupportedCombination: If the triple is not whitelisted
    """
    if mirror.dimension != domain.dimension:
        raise UnsupportedCombination("Mirror and domain dimensions differ")
    kind = h.kind if h.lam > 0 else RegularizerKind.ZERO
    if mirror.kind == MirrorKind.EUCLIDEAN:
        if kind == RegularizerKind.ZERO and domain.kind in _PLAIN_EUCLIDEAN_DOMAINS:
            return _euclidean_plain(domain)
        if kind == RegularizerKind.L1 and domain.kind in _L1_EUCLIDEAN_DOMAINS:
            return _euclidean_l1(domain, h.lam)
        if kind == RegularizerKind.QUADRATIC and domain.kind in _PLAIN_EUCLIDEAN_DOMAINS:
            return _euclidean_quadratic(domain, h.lam)
    elif mirror.kind == MirrorKind.ENTROPIC_SIMPLEX:
        if kind == RegularizerKind.ZERO and domain.kind == DomainKind.SIMPLEX:
            return _entropic_plain()
    elif kind == RegularizerKind.ZERO and domain.kind == DomainKind.ALL_SPACE:
        return _p_uniform_plain(mirror)
    raise UnsupportedCombination(
        f"No exact prox for ({mirror.kind.value}, {domain.kind.value}, {h.kind.value})"
    )


def solve_prox(p: ProxProblem) -> np.ndarray:
    """
    Exact minimizer of h(x) + <g, x - x^t> + D_psi(x, x^t) / eta over the domain.

    Args:
        p: The subproblem

    Returns:
        The minimizer x^{t+1}

    Raises:
        UnsupportedCombination: If the triple is not whitelisted
    """
    return prox_solver(p.mirror, p.domain, p.h)(p.g, p.anchor, p.eta)


def prox_objective(p: ProxProblem, x: np.ndarray) -> float:
    """Value of the subproblem objective at x."""
    return (p.h.value(x) + float(p.g @ (x - p.anchor))
            + bregman(p.mirror, x, p.anchor) / p.eta)


def reference_prox(p: ProxProblem) -> np.ndarray:
    """
    Numerical minimizer of the subproblem, used as a brute-force oracle.

    The l1 term is smoothed by splitting x = u - w with u, w >= 0; the domain
    enters as SLSQP bounds and constraints. The search starts at the anchor.

    Args:
        p: The subproblem

    Returns:
        A feasible approximate minimizer
    """
    d = p.anchor.size
    options = {"ftol": 1e-15, "maxiter": 2000}
    if p.h.kind == RegularizerKind.L1 and p.h.lam > 0:
        return _reference_l1(p, options)
    if p.mirror.kind == MirrorKind.ENTROPIC_SIMPLEX:
        def kl_objective(x: np.ndarray) -> float:
            return (p.h.value(x) + float(p.g @ (x - p.anchor))
                    + float(np.sum(rel_entr(x, p.anchor) - x + p.anchor)) / p.eta)

        def kl_gradient(x: np.ndarray) -> np.ndarray:
            safe = np.maximum(x, 1e-300)
            return p.h.gradient(x) + p.g + np.log(safe / p.anchor) / p.eta

        result = minimize(kl_objective, p.anchor, jac=kl_gradient, method="SLSQP",
                          bounds=[(0.0, 1.0)] * d,
                          constraints=[{"type": "eq", "fun": lambda x: np.sum(x) - 1.0}],
                          options=options)
        return _renormalize(result.x)

    def objective(x: np.ndarray) -> float:
        return prox_objective(p, x)

    def gradient(x: np.ndarray) -> np.ndarray:
        return (p.h.gradient(x) + p.g
                + (grad_psi(p.mirror, x) - grad_psi(p.mirror, p.anchor)) / p.eta)

    bounds, constraints = _domain_constraints(p.domain)
    result = minimize(objective, p.anchor, jac=gradient, method="SLSQP",
                      bounds=bounds, constraints=constraints, options=options)
    return p.domain.project(result.x)


def _renormalize(x: np.ndarray) -> np.ndarray:
    x = np.maximum(x, 0.0)
    return x / np.sum(x)


def _domain_constraints(domain: Domain) -> tuple[Optional[list], list]:
    d = domain.dimension
    if domain.kind == DomainKind.BOX:
        assert domain.lower is not None and domain.upper is not None
        return list(zip(domain.lower, domain.upper)), []
    if domain.kind == DomainKind.L2_BALL:
        assert domain.radius is not None
        radius, center = domain.radius, domain.center
        return None, [{"type": "ineq",
                       "fun": lambda x: radius ** 2 - float((x - center) @ (x - center)),
                       "jac": lambda x: -2.0 * (x - center)}]
    if domain.kind == DomainKind.SIMPLEX:
        return [(0.0, 1.0)] * d, [{"type": "eq", "fun": lambda x: np.sum(x) - 1.0,
                                    "jac": lambda x: np.ones_like(x)}]
    return None, []


def _reference_l1(p: ProxProblem, options: dict) -> np.ndarray:
    d = p.anchor.size
    lam = p.h.lam

    def objective(z: np.ndarray) -> float:
        x = z[:d] - z[d:]
        diff = x - p.anchor
        return (lam * float(np.sum(z)) + float(p.g @ diff)
                + 0.5 * float(diff @ diff) / p.eta)

    def gradient(z: np.ndarray) -> np.ndarray:
        x = z[:d] - z[d:]
        core = p.g + (x - p.anchor) / p.eta
        return np.concatenate([lam + core, lam - core])

    constraints = []
    if p.domain.kind == DomainKind.BOX:
        lower, upper = p.domain.lower, p.domain.upper
        split = np.hstack([np.eye(d), -np.eye(d)])
        constraints = [
            {"type": "ineq", "fun": lambda z: split @ z - lower, "jac": lambda z: split},
            {"type": "ineq", "fun": lambda z: upper - split @ z, "jac": lambda z: -split},
        ]
    start = np.concatenate([np.maximum(p.anchor, 0.0), np.maximum(-p.anchor, 0.0)])
    result = minimize(objective, start, jac=gradient, method="SLSQP",
                      bounds=[(0.0, None)] * (2 * d), constraints=constraints,
                      options=options)
    return p.domain.project(result.x[:d] - result.x[d:])


@dataclass(frozen=True)
class UniformConvexityReport:
    """
    Result of the random-pair uniform convexity check.

    Attributes:
        min_slack: min over pairs of D_psi(x, y) - modulus * ||x - y||^q
        trials: Number of pairs sampled
        passed: Whether min_slack >= -1e-12
    """

    min_slack: float
    trials: int
    passed: bool


def check_uniform_convexity(mirror: MirrorMap, trials: int,
                            rng_seed: int) -> UniformConvexityReport:
    """
    Sample random feasible pairs and test D_psi(x, y) >= (1/q) ||x - y||^q.

    Pairs are drawn from [-1, 1]^d (euclidean), the unit ball (p_uniform)
    or the interior of the simplex (entropic).

    Args:
        mirror: Mirror map to test
        trials: Number of pairs, >= 1
        rng_seed: Seed of the pair sampler

    Returns:
        The slack report

    Raises:
        ValueError: If trials < 1
    """
    if trials < 1:
        raise ValueError("Trials must be greater than 0")
    rng = np.random.default_rng(rng_seed)
    d = mirror.dimension
    if mirror.kind == MirrorKind.ENTROPIC_SIMPLEX:
        region = Domain.simplex(d)
    elif mirror.kind == MirrorKind.P_UNIFORM:
        region = Domain.l2_ball(d, 1.0)
    else:
        region = Domain.box(-np.ones(d), np.ones(d))
    xs = region.sample(rng, trials)
    ys = region.sample(rng, trials)
    if mirror.kind == MirrorKind.ENTROPIC_SIMPLEX:
        ys = np.maximum(ys, ENTROPIC_FLOOR)
    q = mirror.degree
    min_slack = min(
        bregman(mirror, x, y) - mirror.modulus * mirror.norm(x - y) ** q
        for x, y in zip(xs, ys)
    )
    logger.debug("uniform convexity %s d=%d: min slack %.3e", mirror.kind.value, d, min_slack)
    return UniformConvexityReport(float(min_slack), trials, bool(min_slack >= -1e-12))
