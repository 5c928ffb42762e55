"""Stable scalar kernels for probabilities and counts spanning hundreds of decades.

Two value types carry everything the collision formulas produce:

- :class:`Probability` stores ``ln p`` *and* ``ln(1 - p)`` so that both tails
  (``p = 1e-44`` and ``p = 1 - 1e-20``) survive in double precision.
- :class:`ExtReal` stores a sign and ``ln |x|`` (plus the exact integer when one
  is known), covering counts such as ``m = 10**44`` or ``S = 1e35``.

The falling-factorial machinery evaluates ``ln(m! / (m-n)!) - n ln m`` either by
direct summation or by the power-sum (Faulhaber) series, which is what makes
``n = 10**10`` tractable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import NamedTuple

import numpy as np

__all__ = [
    "AccuracyError",
    "DIRECT_SUM_THRESHOLD",
    "DomainError",
    "EXACT_INT_LIMIT",
    "ExtReal",
    "FallingRatio",
    "Probability",
    "faulhaber",
    "falling_ratio_direct",
    "falling_ratio_series",
    "ln_falling_factorial",
    "log1mexp",
    "log_neg_log1m_exp",
    "power_sum",
]

LN2 = math.log(2.0)
EXACT_INT_LIMIT = 10**15
DIRECT_SUM_THRESHOLD = 10**7
SERIES_TOLERANCE = 1e-15
SERIES_MAX_TERMS = 5
_CHUNK = 1 << 20


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class AccuracyError(ArithmeticError):
    """The requested accuracy cannot be guaranteed for these inputs."""


def log1mexp(x: float) -> float:
    """Return ``ln(1 - e**x)`` for ``x <= 0``.

    Uses ``log(-expm1(x))`` for ``x > -ln 2`` and ``log1p(-exp(x))`` otherwise,
    the split that keeps both branches at full relative accuracy.
    """
    if math.isnan(x):
        raise DomainError("log1mexp of NaN")
    if x > 0:
        raise DomainError(f"log1mexp requires x <= 0, got {x!r}")
    if x == 0:
        return -math.inf
    if x > -LN2:
        return math.log(-math.expm1(x))
    return math.log1p(-math.exp(x))


def log_neg_log1m_exp(a: float) -> float:
    """Return ``ln(-ln(1 - e**-a))`` for ``a >= 0``.

    This is the complementary-log-log of a single-cell probability ``1/m`` given
    ``a = ln m``; it stays finite when ``e**-a`` underflows.
    """
    if a < 0 or math.isnan(a):
        raise DomainError(f"expected a >= 0, got {a!r}")
    if a == 0:
        return math.inf
    y = math.exp(-a)
    if y == 0.0:
        return -a
    if y < 1e-8:
        # -ln(1-y)/y = 1 + y/2 + y^2/3 + ...
        return -a + math.log1p(y / 2 + y * y / 3)
    return math.log(-math.log1p(-y))


@dataclass(frozen=True)
class Probability:
    """A probability held as ``(ln p, ln(1 - p))``.

    Build instances with the classmethods; the plain constructor only validates.
    """

    log_p: float
    log_q: float

    def __post_init__(self) -> None:
        for name in ("log_p", "log_q"):
            v = getattr(self, name)
            if math.isnan(v):
                raise DomainError(f"{name} is NaN")
            if v > 0:
                if v > 1e-12:
                    raise DomainError(f"{name} must be <= 0, got {v!r}")
                object.__setattr__(self, name, 0.0)
        if self.log_p == -math.inf and self.log_q == -math.inf:
            raise DomainError("p and 1-p cannot both be zero")

    @classmethod
    def from_p(cls, p: float) -> Probability:
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"probability must lie in [0, 1], got {p!r}")
        log_p = math.log(p) if p > 0 else -math.inf
        log_q = math.log1p(-p) if p < 1 else -math.inf
        return cls(log_p, log_q)

    @classmethod
    def from_log_p(cls, log_p: float) -> Probability:
        return cls(log_p, log1mexp(min(log_p, 0.0)))

    @classmethod
    def from_log_q(cls, log_q: float) -> Probability:
        return cls(log1mexp(min(log_q, 0.0)), log_q)

    @classmethod
    def from_cloglog(cls, t: float) -> Probability:
        """Build from ``t = ln(-ln(1 - p))``.

        Every "at least one collision" probability in this package has the form
        ``1 - exp(-u)`` with ``u = e**t``; going through ``t`` avoids both
        underflow of ``u`` and cancellation in ``1 - exp(-u)``.
        """
        if math.isnan(t):
            raise DomainError("cloglog argument is NaN")
        if t == -math.inf:
            return cls(-math.inf, 0.0)
        if t == math.inf:
            return cls(0.0, -math.inf)
        u = math.exp(t)
        if t < -600.0:
            return cls(t - u / 2, -u)
        return cls(log1mexp(-u), -u)

    @classmethod
    def zero(cls) -> Probability:
        return cls(-math.inf, 0.0)

    @classmethod
    def one(cls) -> Probability:
        return cls(0.0, -math.inf)

    def complement(self) -> Probability:
        return Probability(self.log_q, self.log_p)

    @property
    def p(self) -> float:
        return math.exp(self.log_p)

    @property
    def q(self) -> float:
        """``1 - p``, accurate even when ``p`` is close to 1."""
        return math.exp(self.log_q)

    def __float__(self) -> float:
        return self.p

    def reciprocal(self) -> ExtReal:
        """``1/p`` as an extended real; raises ``OverflowError`` when ``p = 0``."""
        if self.log_p == -math.inf:
            raise OverflowError("reciprocal of a zero probability (infinite expectation)")
        return ExtReal.from_log(-self.log_p)


@total_ordering
@dataclass(frozen=True, eq=False)
class ExtReal:
    """Real number stored as ``sign * exp(log_abs)``.

    ``exact`` holds the integer value when it is known exactly (integers built
    with :meth:`from_int`, and products of such). Conversions back to ``int``
    are only exact when that field is populated.
    """

    log_abs: float
    sign: int = 1
    exact: int | None = None

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if math.isnan(self.log_abs):
            raise DomainError("log magnitude is NaN")
        if self.sign == 0 and self.log_abs != -math.inf:
            object.__setattr__(self, "log_abs", -math.inf)

    @classmethod
    def from_int(cls, n: int) -> ExtReal:
        n = int(n)
        if n == 0:
            return cls(-math.inf, 0, 0)
        return cls(math.log(abs(n)), 1 if n > 0 else -1, n)

    @classmethod
    def from_float(cls, x: float) -> ExtReal:
        if math.isnan(x):
            raise DomainError("cannot represent NaN")
        if x == 0:
            return cls(-math.inf, 0)
        exact = int(x) if math.isfinite(x) and x == int(x) and abs(x) <= EXACT_INT_LIMIT else None
        return cls(math.log(abs(x)), 1 if x > 0 else -1, exact)

    @classmethod
    def from_log(cls, log_abs: float, sign: int = 1) -> ExtReal:
        if log_abs == -math.inf:
            return cls(-math.inf, 0)
        return cls(float(log_abs), sign)

    @classmethod
    def cells(cls, log_m: float) -> ExtReal:
        """Cell count from its logarithm, snapped to an exact integer when small.

        Cell counts are products of integer level counts, so an ``exp(log_m)``
        within rounding of an integer below ``EXACT_INT_LIMIT`` is that integer.
        """
        if not math.isfinite(log_m) or log_m < 0:
            raise DomainError(f"log cell count must be finite and >= 0, got {log_m!r}")
        if log_m < math.log(EXACT_INT_LIMIT):
            x = math.exp(log_m)
            r = round(x)
            if r >= 1 and abs(x - r) <= 1e-9 * r:
                return cls(log_m, 1, r)
        return cls(log_m, 1)

    # conversions -----------------------------------------------------------
    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf

    def __int__(self) -> int:
        if self.exact is not None:
            return self.exact
        x = float(self)
        if not math.isfinite(x) or abs(x) > EXACT_INT_LIMIT or x != int(x):
            raise ValueError(f"{self!r} has no exact integer value")
        return int(x)

    @property
    def log10(self) -> float:
        return self.log_abs / math.log(10.0)

    def is_finite(self) -> bool:
        return self.log_abs != math.inf

    def sci(self, digits: int = 17) -> tuple[float, int]:
        """Decimal mantissa/exponent pair of ``|x|``, valid beyond float range."""
        if self.sign == 0:
            return 0.0, 0
        if self.exact is not None:
            s = f"{abs(self.exact):.{digits - 1}e}" if abs(self.exact) < 1e300 else None
            if s is not None:
                mant, exp = s.split("e")
                return float(mant), int(exp)
        e10 = self.log10
        exp = math.floor(e10)
        mant = 10.0 ** (e10 - exp)
        if mant >= 10.0:
            mant, exp = mant / 10.0, exp + 1
        return mant, exp

    # arithmetic --------------------------------------------------------------
    def __mul__(self, other: ExtReal | int | float) -> ExtReal:
        other = _coerce(other)
        sign = self.sign * other.sign
        if sign == 0:
            return ExtReal(-math.inf, 0, 0)
        exact = self.exact * other.exact if self.exact is not None and other.exact is not None else None
        return ExtReal(self.log_abs + other.log_abs, sign, exact)

    __rmul__ = __mul__

    def reciprocal(self) -> ExtReal:
        if self.sign == 0:
            raise ZeroDivisionError("reciprocal of zero")
        exact = self.exact if self.exact is not None and abs(self.exact) == 1 else None
        return ExtReal(-self.log_abs, self.sign, exact)

    def __truediv__(self, other: ExtReal | int | float) -> ExtReal:
        return self * _coerce(other).reciprocal()

    def __neg__(self) -> ExtReal:
        return ExtReal(self.log_abs, -self.sign, None if self.exact is None else -self.exact)

    def ceil(self, *, snap_ulps: int = 0) -> tuple[ExtReal, bool]:
        """Round up to an integer.

        Returns ``(value, ambiguous)``. Above ``EXACT_INT_LIMIT`` the fractional
        part is not resolvable in double precision, so the value is returned
        unchanged and ``ambiguous`` is True. ``snap_ulps`` treats values within
        that many ulps above an integer as the integer itself.
        """
        if self.exact is not None:
            return self, False
        x = float(self)
        if not math.isfinite(x) or abs(x) >= EXACT_INT_LIMIT:
            return self, True
        c = math.ceil(x)
        if snap_ulps and c - 1 != 0 and x - (c - 1) <= snap_ulps * math.ulp(x):
            c -= 1
        return ExtReal.from_int(c), False

    # comparison --------------------------------------------------------------
    def _key(self) -> tuple[int, float]:
        return self.sign, self.sign * self.log_abs if self.sign else 0.0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float)) and not isinstance(other, bool):
            other = _coerce(other)
        if not isinstance(other, ExtReal):
            return NotImplemented
        if self.exact is not None and other.exact is not None:
            return self.exact == other.exact
        return self.sign == other.sign and (self.sign == 0 or self.log_abs == other.log_abs)

    def __lt__(self, other: ExtReal | int | float) -> bool:
        other = _coerce(other)
        if self.exact is not None and other.exact is not None:
            return self.exact < other.exact
        if self.sign != other.sign:
            return self.sign < other.sign
        if self.sign == 0:
            return False
        return self.log_abs < other.log_abs if self.sign > 0 else self.log_abs > other.log_abs

    def __hash__(self) -> int:
        if self.exact is not None:
            return hash(self.exact)
        return hash((self.sign, self.log_abs))

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"ExtReal({self.exact})"
        mant, exp = self.sci(6)
        sign = "-" if self.sign < 0 else ""
        return f"ExtReal({sign}{mant:.5f}e{exp:+d})"


def _coerce(x: ExtReal | int | float) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    if isinstance(x, int):
        return ExtReal.from_int(x)
    return ExtReal.from_float(float(x))


# --------------------------------------------------------------------------
# power sums and the falling factorial


def power_sum(n: int, k: int) -> int:
    """Exact ``sum(i**k for i in range(1, n))`` from the closed forms, k = 1..6."""
    if n < 1:
        raise DomainError(f"power sums need n >= 1, got {n}")
    N = n - 1
    if k == 1:
        return N * (N + 1) // 2
    if k == 2:
        return N * (N + 1) * (2 * N + 1) // 6
    if k == 3:
        return (N * (N + 1) // 2) ** 2
    if k == 4:
        return N * (N + 1) * (2 * N + 1) * (3 * N * N + 3 * N - 1) // 30
    if k == 5:
        return N * N * (N + 1) ** 2 * (2 * N * N + 2 * N - 1) // 12
    if k == 6:
        return N * (N + 1) * (2 * N + 1) * (3 * N**4 + 6 * N**3 - 3 * N + 1) // 42
    raise DomainError(f"unsupported power k={k}; closed forms exist for k in 1..6")


def faulhaber(n: int, k: int) -> ExtReal:
    """``sum_{i=1}^{n-1} i**k`` as an :class:`ExtReal` (exact integer attached)."""
    return ExtReal.from_int(power_sum(n, k))


class FallingRatio(NamedTuple):
    """``ln(U(m,n) / m**n) = -exp(log_neg)``; ``terms``/``bound`` describe the series."""

    log_neg: float
    terms: int = 0
    bound: float = 0.0

    @property
    def value(self) -> float:
        return -math.exp(self.log_neg)


def _as_cells(m: ExtReal | int | float) -> ExtReal:
    if isinstance(m, ExtReal):
        return m
    if isinstance(m, int):
        if m < 1:
            raise DomainError(f"cell count must be >= 1, got {m}")
        return ExtReal.from_int(m)
    return ExtReal.cells(math.log(m))


def _check_not_pigeonhole(m: ExtReal, n: int) -> None:
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if m.exact is not None and n > m.exact:
        raise DomainError(f"n={n} exceeds m={m.exact}: the falling factorial is zero")


def falling_ratio_direct(m: ExtReal | int | float, n: int) -> FallingRatio:
    """``sum_{i=1}^{n-1} ln(1 - i/m)`` by direct summation.

    Each term is written ``i * h(i/m)`` with ``h(r) = -log1p(-r)/r`` so that the
    sum is accumulated at O(1) magnitude and the ``1/m`` factor stays in log space.
    """
    m = _as_cells(m)
    _check_not_pigeonhole(m, n)
    if n <= 1:
        return FallingRatio(-math.inf)
    mf = float(m)
    parts = []
    for start in range(1, n, _CHUNK):
        i = np.arange(start, min(n, start + _CHUNK), dtype=np.float64)
        r = i / mf
        h = np.ones_like(r)
        nz = r > 0
        h[nz] = -np.log1p(-r[nz]) / r[nz]
        parts.append(float(np.sum(i * h)))
    return FallingRatio(math.log(math.fsum(parts)) - m.log_abs)


def falling_ratio_series(
    m: ExtReal | int | float,
    n: int,
    *,
    tol: float = SERIES_TOLERANCE,
    max_terms: int = SERIES_MAX_TERMS,
) -> FallingRatio:
    """``sum_{i=1}^{n-1} ln(1 - i/m)`` as ``-sum_k S_k / (k m**k)``.

    ``S_k`` are exact power sums. Terms are added until the tail bound
    ``S_{k+1} / ((k+1) m**(k+1)) / (1 - (n-1)/m)`` drops below ``tol`` relative
    to the running sum; raises :class:`AccuracyError` if ``max_terms`` is not
    enough (``n**2`` approaching ``m``).
    """
    m = _as_cells(m)
    _check_not_pigeonhole(m, n)
    if n <= 1:
        return FallingRatio(-math.inf)
    log_m = m.log_abs
    log_ratio = math.log(n - 1) - log_m
    if log_ratio >= 0:
        raise AccuracyError(f"series diverges for n={n} >= m")
    log_geom = -math.log1p(-math.exp(log_ratio))
    log_terms: list[float] = []
    for k in range(1, max_terms + 1):
        log_terms.append(math.log(power_sum(n, k)) - math.log(k) - k * log_m)
        total = float(np.logaddexp.reduce(log_terms))
        log_next = math.log(power_sum(n, k + 1)) - math.log(k + 1) - (k + 1) * log_m + log_geom
        rel = log_next - total
        if rel <= math.log(tol):
            return FallingRatio(total, k, math.exp(rel))
    raise AccuracyError(
        f"falling-factorial series did not reach relative {tol:g} in {max_terms} terms "
        f"(n={n}, ln m={log_m:.6g}); use the Monte Carlo oracle for this regime"
    )


def ln_falling_factorial(
    m: ExtReal | int | float, n: int, *, threshold: int = DIRECT_SUM_THRESHOLD
) -> float:
    """``ln(m (m-1) ... (m-n+1))``.

    Direct summation for ``n <= threshold``, the power-sum series beyond it.
    """
    m = _as_cells(m)
    _check_not_pigeonhole(m, n)
    if n == 0:
        return 0.0
    ratio = falling_ratio_direct(m, n) if n <= threshold else falling_ratio_series(m, n)
    return n * m.log_abs + ratio.value
