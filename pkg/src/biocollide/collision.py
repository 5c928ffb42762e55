"""Collision metrics for ``n`` individuals spread uniformly over ``m`` cells.

Every function takes ``log_m = ln m`` so that ``m = 10**44`` and beyond never
has to be materialized. Four metrics are provided:

``exact_match_prob``
    a given target shares its cell with at least one of ``n - 1`` peers.
``match_cohort_size``
    the smallest peer group ``S`` matching a target with probability ``>= p``.
``pair_match_prob``
    two randomly drawn individuals share a cell (``1/m``).
``population_match_prob``
    some cell holds two or more of the ``n`` individuals (birthday problem).

Each probability function accepts an :class:`ApproxMethod`. ``AUTO`` resolves
to a concrete variant, which is recorded in the returned :class:`MetricResult`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .numerics import (
    DIRECT_SUM_THRESHOLD,
    EXACT_INT_LIMIT,
    AccuracyError,
    DomainError,
    ExtReal,
    Probability,
    falling_ratio_direct,
    falling_ratio_series,
    log_neg_log1m_exp,
)

__all__ = [
    "ApproxMethod",
    "MetricResult",
    "UnboundedError",
    "exact_match_prob",
    "expected_pair_trials",
    "expected_population_redraws",
    "expected_redistributions_exact",
    "match_cohort_size",
    "pair_match_prob",
    "population_match_prob",
]

AUTO_COHORT_EXACT_MAX_M = 1e15
_LOG_EXACT_INT_LIMIT = math.log(EXACT_INT_LIMIT)


class ApproxMethod(str, enum.Enum):
    EXACT = "exact"
    LINEAR = "linear"
    EXPONENTIAL = "exponential"
    SERIES_EXPANSION = "series_expansion"
    QUADRATIC = "quadratic"
    AUTO = "auto"


class UnboundedError(ArithmeticError):
    """The requested quantity is infinite (e.g. a match with certainty ``p = 1``)."""


@dataclass(frozen=True)
class MetricResult:
    """A metric value plus the formula variant that produced it.

    ``error_bound`` is relative. For approximations it is the measured deviation
    from the exact (or series) evaluation; for the series it is the truncation
    bound. ``ceiling_ambiguous`` marks integer results too large for the
    fractional part to be resolved in double precision (may be off by one).
    """

    value: Probability | ExtReal
    method_used: ApproxMethod
    error_bound: float | None = None
    ceiling_ambiguous: bool = False

    def __post_init__(self) -> None:
        if self.method_used is ApproxMethod.AUTO:
            raise ValueError("method_used must be a concrete variant, not AUTO")
        if self.method_used is not ApproxMethod.EXACT and self.error_bound is None:
            raise ValueError(f"{self.method_used.value} results need an error bound")


def _check_log_m(log_m: float) -> None:
    if not math.isfinite(log_m) or log_m < 0:
        raise DomainError(f"ln m must be finite and >= 0, got {log_m!r}")


def _check_n(n: int, least: int = 1) -> None:
    if isinstance(n, bool) or not isinstance(n, int):
        raise DomainError(f"n must be an integer, got {n!r}")
    if n < least:
        raise DomainError(f"n must be >= {least}, got {n}")


def _rel_dev(log_a: float, log_b: float) -> float:
    """Relative deviation ``|a/b - 1|`` of two log-domain positives."""
    if log_a == log_b:
        return 0.0
    if math.isinf(log_a) or math.isinf(log_b):
        return math.inf
    d = log_a - log_b
    return abs(math.expm1(d)) if d < 700 else math.inf


def _as_probability(p: Probability | float) -> Probability:
    return p if isinstance(p, Probability) else Probability.from_p(float(p))


# --------------------------------------------------------------------------
# exact match


def exact_match_prob(
    log_m: float, n: int, method: ApproxMethod = ApproxMethod.AUTO
) -> MetricResult:
    """Probability that a target's cell holds at least one of ``n - 1`` peers.

    EXACT is ``1 - (1 - 1/m)**(n-1)`` evaluated as a complementary log-log,
    stable at every scale, so AUTO always picks it.
    """
    _check_log_m(log_m)
    _check_n(n)
    method = ApproxMethod(method)
    if method is ApproxMethod.AUTO:
        method = ApproxMethod.EXACT
    if method in (ApproxMethod.SERIES_EXPANSION, ApproxMethod.QUADRATIC):
        raise DomainError(f"{method.value} is not defined for the exact-match metric")
    if n == 1:
        return MetricResult(Probability.zero(), method, None if method is ApproxMethod.EXACT else 0.0)

    exact = Probability.from_cloglog(math.log(n - 1) + log_neg_log1m_exp(log_m))
    if method is ApproxMethod.EXACT:
        return MetricResult(exact, method)
    log_x = math.log(n - 1) - log_m
    if method is ApproxMethod.LINEAR:
        value = Probability.from_log_p(min(log_x, 0.0))
    else:
        value = Probability.from_cloglog(log_x)
    return MetricResult(value, method, _rel_dev(value.log_p, exact.log_p))


def expected_redistributions_exact(log_m: float, n: int) -> ExtReal:
    """``1 / P(exact match)``: peer redistributions expected before the target is matched."""
    _check_n(n, least=2)
    return exact_match_prob(log_m, n, ApproxMethod.EXACT).value.reciprocal()


# --------------------------------------------------------------------------
# match with probability p


def match_cohort_size(
    log_m: float, p: Probability | float, method: ApproxMethod = ApproxMethod.AUTO
) -> MetricResult:
    """Smallest peer count ``S`` with ``1 - (1 - 1/m)**S >= p``.

    EXACT
        ``ceil(ln(1-p) / ln(1-1/m))``, then probed so that ``S`` satisfies the
        inequality and ``S - 1`` does not.
    LINEAR
        ``ceil(-m ln(1-p))`` (large ``m``).
    QUADRATIC
        ``ceil(m p)`` (small ``p``).
    AUTO
        EXACT while ``m <= 1e15``, LINEAR above.
    """
    _check_log_m(log_m)
    p = _as_probability(p)
    if p.log_p == -math.inf:
        raise DomainError("p must be > 0")
    if p.log_q == -math.inf:
        raise UnboundedError("a match with probability 1 needs an unbounded peer set")
    method = ApproxMethod(method)
    if method is ApproxMethod.AUTO:
        method = ApproxMethod.EXACT if log_m <= math.log(AUTO_COHORT_EXACT_MAX_M) else ApproxMethod.LINEAR
    if method in (ApproxMethod.EXPONENTIAL, ApproxMethod.SERIES_EXPANSION):
        raise DomainError(f"{method.value} is not defined for the match-at-p metric")

    log_neg_q = math.log(-p.log_q)
    log_cell = log_neg_log1m_exp(log_m)
    log_exact = log_neg_q - log_cell

    if method is ApproxMethod.EXACT:
        if log_cell == math.inf:  # m == 1: the first peer always matches
            return MetricResult(ExtReal.from_int(1), method)
        if log_exact >= _LOG_EXACT_INT_LIMIT:
            return MetricResult(ExtReal.from_log(log_exact), method, ceiling_ambiguous=True)
        return MetricResult(ExtReal.from_int(_minimal_cohort(log_m, p, log_exact)), method)

    if method is ApproxMethod.LINEAR:
        log_s = log_m + log_neg_q
    else:
        log_s = log_m + p.log_p
    cells = ExtReal.cells(log_m)
    if cells.exact is not None and log_s < _LOG_EXACT_INT_LIMIT:
        factor = -p.log_q if method is ApproxMethod.LINEAR else p.p
        raw = ExtReal.from_float(cells.exact * factor)
    else:
        raw = ExtReal.from_log(log_s)
    s, ambiguous = raw.ceil(snap_ulps=8)
    if s < 1:
        s = ExtReal.from_int(1)
    return MetricResult(s, method, _rel_dev(log_s, log_exact), ambiguous)


def _minimal_cohort(log_m: float, p: Probability, log_exact: float) -> int:
    step = math.log1p(-math.exp(-log_m))
    target = p.log_q
    s = max(1, math.ceil(math.exp(log_exact)))
    while s * step > target:
        s += 1
    while s > 1 and (s - 1) * step <= target:
        s -= 1
    return s


# --------------------------------------------------------------------------
# pair match


def pair_match_prob(log_m: float) -> Probability:
    """``1/m``: two random individuals land in the same cell."""
    _check_log_m(log_m)
    return Probability.from_log_p(-log_m)


def expected_pair_trials(log_m: float) -> ExtReal:
    """``m``: random pairs expected to be tested before one matches."""
    _check_log_m(log_m)
    return ExtReal.cells(log_m)


# --------------------------------------------------------------------------
# population match


def population_match_prob(
    log_m: float,
    n: int,
    method: ApproxMethod = ApproxMethod.AUTO,
    *,
    large_n: bool = False,
    direct_threshold: int = DIRECT_SUM_THRESHOLD,
) -> MetricResult:
    """Probability that at least two of ``n`` individuals share a cell.

    EXACT sums ``ln(1 - i/m)`` directly (``n <= direct_threshold``);
    SERIES_EXPANSION evaluates the same sum from power sums (any ``n``, raises
    :class:`AccuracyError` when ``n**2`` approaches ``m``); EXPONENTIAL is
    ``1 - exp(-n(n-1)/2m)``; QUADRATIC is ``n(n-1)/2m``, or ``n**2/2m`` with
    ``large_n``. AUTO is EXACT up to the threshold and SERIES_EXPANSION above.
    ``n > m`` returns exactly 1 before any formula runs.
    """
    _check_log_m(log_m)
    _check_n(n)
    method = ApproxMethod(method)
    if method is ApproxMethod.AUTO:
        method = ApproxMethod.EXACT if n <= direct_threshold else ApproxMethod.SERIES_EXPANSION
    if method is ApproxMethod.LINEAR:
        raise DomainError("linear is not defined for the population-match metric")
    bound = None if method is ApproxMethod.EXACT else 0.0

    if n == 1:
        return MetricResult(Probability.zero(), method, bound)
    cells = ExtReal.cells(log_m)
    if (cells.exact is not None and n > cells.exact) or n > float(cells) + 1:
        return MetricResult(Probability.one(), method, bound)

    if method is ApproxMethod.EXACT:
        if n > direct_threshold:
            raise DomainError(
                f"exact direct summation is limited to n <= {direct_threshold}; "
                "use AUTO or SERIES_EXPANSION"
            )
        if n == 2:
            return MetricResult(pair_match_prob(log_m), method)
        return MetricResult(Probability.from_cloglog(falling_ratio_direct(cells, n).log_neg), method)

    if method is ApproxMethod.SERIES_EXPANSION:
        if n == 2:
            return MetricResult(pair_match_prob(log_m), method, 0.0)
        ratio = falling_ratio_series(cells, n)
        return MetricResult(Probability.from_cloglog(ratio.log_neg), method, ratio.bound)

    log_pairs = 2 * math.log(n) - math.log(2) if large_n else math.log(n) + math.log(n - 1) - math.log(2)
    if method is ApproxMethod.EXPONENTIAL:
        value = Probability.from_cloglog(log_pairs - log_m)
    else:
        value = Probability.from_log_p(min(log_pairs - log_m, 0.0))
    try:
        reference = population_match_prob(log_m, n, direct_threshold=direct_threshold).value
        err = _rel_dev(value.log_p, reference.log_p)
    except AccuracyError:
        err = math.inf
    return MetricResult(value, method, err)


def expected_population_redraws(log_m: float, n: int) -> ExtReal:
    """``1 / P(population match)``: whole-population redraws expected before any collision."""
    _check_n(n)
    return population_match_prob(log_m, n).value.reciprocal()
