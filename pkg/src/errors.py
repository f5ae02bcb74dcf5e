"""
Exception hierarchy for the laboratory.

Every error derives from CsmdError and from the builtin exception it refines,
so callers may catch either the precise error or the usual ValueError.
"""


class CsmdError(Exception):
    """Base class of every error raised by the src package."""


class NonInteriorPoint(CsmdError, ValueError):
    """A point lies outside the interior of the mirror map's domain."""


class InfeasiblePoint(CsmdError, ValueError):
    """A point lies outside the feasible set."""


class UnsupportedCombination(CsmdError, ValueError):
    """No exact prox solver exists for a (mirror, domain, regularizer) triple."""


class HorizonRequired(CsmdError, ValueError):
    """A horizon-dependent step-size rule was used without a horizon."""


class ConstraintViolated(CsmdError, ValueError):
    """A schedule constant violates the constraint of its rule."""


class StepTooLarge(CsmdError, ValueError):
    """A step size exceeds 1 / (2L v mu_f)."""


class DomainError(CsmdError, ValueError):
    """An argument lies outside the range a formula is defined on."""


class MissingConstant(CsmdError, ValueError):
    """A constant needed by a formula was not supplied."""


class InsufficientSamples(CsmdError, ValueError):
    """A Monte Carlo check has too few samples to decide."""


class InsufficientReplications(CsmdError, ValueError):
    """A quantile report has too few replications for its smallest delta."""


class NonPositiveGap(CsmdError, ValueError):
    """A rate fit received a gap that is zero or negative."""


class AssumptionMismatch(CsmdError, ValueError):
    """A noise model does not certify the assumption a bound requires."""


class ConfigError(CsmdError, ValueError):
    """An experiment configuration is malformed."""


class HistoryNotRetained(CsmdError, RuntimeError):
    """Iterate history was requested but not recorded."""


class NumericalDivergence(CsmdError, ArithmeticError):
    """The objective gap of a run exceeded the divergence threshold."""
