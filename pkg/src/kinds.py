"""
Enumerations used throughout the laboratory.

This module contains the closed vocabularies (mirror maps, domains, regularizers,
objective families, noise assumptions, generators, step-size rules and verdicts)
that the configuration layer maps strings onto.
"""

from enum import Enum


class MirrorKind(Enum):
    """
    Enumeration of the supported mirror maps.

    Attributes:
        EUCLIDEAN: psi(x) = 1/2 ||x||_2^2
        ENTROPIC_SIMPLEX: negative entropy on the probability simplex
        P_UNIFORM: scaled ||x||_2^(p/(p-1)) potential for heavy-tailed geometry
    """

    EUCLIDEAN = "euclidean"
    ENTROPIC_SIMPLEX = "entropic_simplex"
    P_UNIFORM = "p_uniform"


class DomainKind(Enum):
    """
    Enumeration of the feasible sets.

    Attributes:
        ALL_SPACE: the whole of R^d
        BOX: coordinatewise bounds lower <= x <= upper
        L2_BALL: Euclidean ball of a given radius around a center
        SIMPLEX: the probability simplex
    """

    ALL_SPACE = "all_space"
    BOX = "box"
    L2_BALL = "l2_ball"
    SIMPLEX = "simplex"


class RegularizerKind(Enum):
    """Enumeration of the composite terms h handled exactly inside the prox step."""

    ZERO = "zero"
    L1 = "l1"
    QUADRATIC = "quadratic"


class FunctionKind(Enum):
    """Enumeration of the smooth/non-smooth part f of the objective."""

    QUADRATIC = "quadratic"
    HUBERIZED_ABS = "huberized_abs"
    ABS_SUM = "abs_sum"
    LOG_SUM_EXP = "log_sum_exp"
    LINEAR = "linear"
    QUADRATIC_ABS = "quadratic_abs"


class Assumption(Enum):
    """
    Enumeration of the noise hypotheses a generator can certify.

    Attributes:
        BOUNDED_VARIANCE: 5A, E||xi||^2 <= sigma^2
        SUB_GAUSSIAN: 5B, E exp(lambda ||xi||^2) <= exp(lambda sigma^2)
        HEAVY_TAILED: 5C, E||xi||^p <= sigma^p with p in (1, 2)
        SUB_WEIBULL: 5D, E exp(lambda ||xi||^p) <= exp(lambda sigma^p) with p in (0, 2)
    """

    BOUNDED_VARIANCE = "5A"
    SUB_GAUSSIAN = "5B"
    HEAVY_TAILED = "5C"
    SUB_WEIBULL = "5D"


class NoiseGenerator(Enum):
    """Enumeration of the shipped noise generators."""

    GAUSSIAN = "gaussian"
    SPHERE_BOUNDED = "sphere_bounded"
    SCALED_GAUSSIAN_MGF = "scaled_gaussian_mgf"
    SYMMETRIC_PARETO = "symmetric_pareto"
    SYMMETRIC_WEIBULL = "symmetric_weibull"


class Rule(Enum):
    """Enumeration of every step-size rule."""

    CONVEX_ANYTIME = "convex_anytime"
    CONVEX_FIXED = "convex_fixed"
    ZAMANI = "zamani"
    STRC_F_ANYTIME_1 = "strc_f_anytime_1"
    STRC_F_ANYTIME_2 = "strc_f_anytime_2"
    STRC_F_KNOWN_PIECEWISE = "strc_f_known_piecewise"
    STRC_H_ANYTIME = "strc_h_anytime"
    STRC_H_KNOWN_PIECEWISE = "strc_h_known_piecewise"
    HEAVY_ANYTIME = "heavy_anytime"
    HEAVY_FIXED = "heavy_fixed"
    HEAVY_ZAMANI = "heavy_zamani"
    SUBWEIBULL_ANYTIME = "subweibull_anytime"
    SUBWEIBULL_FIXED = "subweibull_fixed"
    SUBWEIBULL_ZAMANI = "subweibull_zamani"
    CONSTANT = "constant"


class BoundKind(Enum):
    """Which right-hand side an experiment is compared against."""

    NONE = "none"
    EXPECTED = "expected"
    HP = "hp"
    SUBWEIBULL = "subweibull"


class Verdict(Enum):
    """
    Outcome of a machine-checkable acceptance line.

    Attributes:
        PASS: the check held
        FAIL: the check did not hold
    """

    PASS = "PASS"
    FAIL = "FAIL"
