"""Collision reports (one table row per quantization level), sweeps and formatting."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .collision import (
    ApproxMethod,
    MetricResult,
    exact_match_prob,
    expected_pair_trials,
    match_cohort_size,
    pair_match_prob,
    population_match_prob,
)
from .model import FeatureCatalog
from .numerics import DomainError, ExtReal, Probability

__all__ = [
    "CSV_COLUMNS",
    "CollisionReport",
    "DEFAULT_Q_RANGE",
    "SweepPoint",
    "build_report",
    "build_report_for_catalog",
    "default_p_grid",
    "format_exact",
    "format_value",
    "parse_value",
    "render_sweep_csv",
    "render_table",
    "render_table_csv",
    "sweep_gnuplot_script",
    "sweep_match_at_p",
    "table2",
]

DEFAULT_N = 10**10
DEFAULT_K = 44
DEFAULT_P = 1e-9
DEFAULT_Q_RANGE = (10, 9, 8, 7, 6, 5, 4, 3, 2)
SATURATED_LOG_Q = math.log(1e-4)


@dataclass(frozen=True)
class CollisionReport:
    q: int | None
    k: int
    n: int
    p: Probability
    log_m: float
    P_E: Probability
    S: ExtReal
    P_M: Probability
    P_B: Probability
    N_E: ExtReal
    N_M: ExtReal
    N_B: ExtReal
    methods: dict[str, ApproxMethod] = field(default_factory=dict)
    S_ambiguous: bool = False


@dataclass(frozen=True)
class SweepPoint:
    p: float
    S: ExtReal


def _build(log_m: float, n: int, p: Probability | float, q: int | None, k: int) -> CollisionReport:
    if n < 2:
        raise DomainError(f"reports need n >= 2, got {n}")
    if not isinstance(p, Probability):
        if not 0.0 < float(p) < 1.0:
            raise DomainError(f"p must lie strictly between 0 and 1, got {p!r}")
        p = Probability.from_p(float(p))
    pe: MetricResult = exact_match_prob(log_m, n)
    s: MetricResult = match_cohort_size(log_m, p)
    pb: MetricResult = population_match_prob(log_m, n)
    pm = pair_match_prob(log_m)
    return CollisionReport(
        q=q,
        k=k,
        n=n,
        p=p,
        log_m=log_m,
        P_E=pe.value,
        S=s.value,
        P_M=pm,
        P_B=pb.value,
        N_E=pe.value.reciprocal(),
        N_M=expected_pair_trials(log_m),
        N_B=pb.value.reciprocal(),
        methods={"P_E": pe.method_used, "S": s.method_used, "P_M": ApproxMethod.EXACT, "P_B": pb.method_used},
        S_ambiguous=s.ceiling_ambiguous,
    )


def build_report(q: int, k: int, n: int, p: Probability | float) -> CollisionReport:
    """All four metrics (AUTO methods) for ``n`` individuals over ``q**k`` cells."""
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return _build(k * math.log(q), n, p, q, k)


def build_report_for_catalog(catalog: FeatureCatalog, n: int, p: Probability | float) -> CollisionReport:
    return _build(catalog.log_m, n, p, catalog.uniform_levels, catalog.k)


def table2(
    n: int = DEFAULT_N,
    k: int = DEFAULT_K,
    p: Probability | float = DEFAULT_P,
    q_range: Sequence[int] = DEFAULT_Q_RANGE,
) -> list[CollisionReport]:
    if not q_range:
        raise DomainError("q_range must not be empty")
    return [build_report(q, k, n, p) for q in q_range]


def default_p_grid(points: int = 40, p_min: float = 1e-9, p_max: float = 0.9999) -> list[float]:
    if points < 2:
        raise DomainError(f"a sweep needs at least 2 points, got {points}")
    if not 0 < p_min < p_max < 1:
        raise DomainError(f"need 0 < p_min < p_max < 1, got {p_min!r}, {p_max!r}")
    return [float(x) for x in np.logspace(math.log10(p_min), math.log10(p_max), points)]


def sweep_match_at_p(q: int = 2, k: int = DEFAULT_K, p_values: Iterable[float] | None = None) -> list[SweepPoint]:
    """Peer-set size ``S`` from ``ceil(-m ln(1-p))`` for each ``p``."""
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    log_m = k * math.log(q)
    values = default_p_grid() if p_values is None else list(p_values)
    points = []
    for p in values:
        if isinstance(p, Probability):
            prob, p = p, p.p
        elif not 0.0 < p < 1.0:
            raise DomainError(f"sweep p must lie strictly between 0 and 1, got {p!r}")
        else:
            prob = Probability.from_p(p)
        points.append(SweepPoint(p, match_cohort_size(log_m, prob, ApproxMethod.LINEAR).value))
    return points


# --------------------------------------------------------------------------
# formatting


def _as_ext(x: Probability | ExtReal | float | int) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    if isinstance(x, Probability):
        return ExtReal.from_log(x.log_p)
    if isinstance(x, int):
        return ExtReal.from_int(x)
    return ExtReal.from_float(float(x))


def format_value(x: Probability | ExtReal | float | int) -> str:
    """Three significant figures in the style of the collision tables.

    ``5.68e-04`` in general; fixed point in ``[0.001, 9999]`` (``0.0495``, with
    at least three decimals up to 1 so that 1 prints ``1.000``); a rounded
    mantissa of exactly 1 prints as ``1e+34``. A probability within ``1e-4`` of
    (but not equal to) 1 prints as ``0.9999+``.
    """
    if isinstance(x, Probability) and x.log_q < SATURATED_LOG_Q:
        return "1.000" if x.log_q == -math.inf else "0.9999+"
    v = _as_ext(x)
    if v.sign == 0:
        return "0"
    sign = "-" if v.sign < 0 else ""
    if not v.is_finite():
        return f"{sign}inf"
    mant, exp = v.sci(17)
    r = Decimal(repr(mant)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    if r >= 10:
        r, exp = (r / 10).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP), exp + 1
    shown = r.scaleb(exp)
    if Decimal("0.001") <= shown <= Decimal("9999"):
        decimals = max(0, 2 - exp)
        if shown <= 1:
            decimals = max(3, decimals)
        return f"{sign}{shown:.{decimals}f}"
    if r == 1:
        return f"{sign}1e{exp:+03d}"
    return f"{sign}{r}e{exp:+03d}"


def parse_value(text: str) -> float:
    """Inverse of :func:`format_value` (the saturation marker ``+`` is dropped)."""
    return float(text.rstrip("+"))


def format_exact(x: Probability | ExtReal | float | int) -> str:
    """17 significant digits, usable beyond the double range for :class:`ExtReal`."""
    if isinstance(x, Probability):
        if x.log_p > -700:
            return f"{x.p:.17g}"
        x = ExtReal.from_log(x.log_p)
    if isinstance(x, (int, float)):
        return f"{x:.17g}" if isinstance(x, float) else str(x)
    if x.exact is not None:
        return str(x.exact)
    if x.sign == 0:
        return "0"
    if not x.is_finite():
        return "inf" if x.sign > 0 else "-inf"
    f = float(x)
    if math.isfinite(f) and f != 0:
        return f"{f:.17g}"
    mant, exp = x.sci(17)
    return f"{'-' if x.sign < 0 else ''}{mant:.16f}e{exp:+d}"


def _g17(v: float) -> str:
    return f"{v:.17g}"


def _methods(r: CollisionReport) -> str:
    return ";".join(f"{key}={m.value}" for key, m in r.methods.items())


CSV_COLUMNS = (
    "q", "k", "n", "p",
    "P_E", "S", "P_M", "P_B", "N_E", "N_M", "N_B", "methods",
    "P_E_exact", "S_exact", "P_M_exact", "P_B_exact", "N_E_exact", "N_M_exact", "N_B_exact",
    "log_m", "log_P_E", "log_one_minus_P_E", "log_P_M", "log_P_B", "log_one_minus", "S_ambiguous",
)  # fmt: skip


def _csv_row(r: CollisionReport) -> list[str]:
    return [
        "" if r.q is None else str(r.q),
        str(r.k),
        str(r.n),
        format_value(r.p.p),
        format_value(r.P_E),
        format_value(r.S),
        format_value(r.P_M),
        format_value(r.P_B),
        format_value(r.N_E),
        format_value(r.N_M),
        format_value(r.N_B),
        _methods(r),
        format_exact(r.P_E),
        format_exact(r.S),
        format_exact(r.P_M),
        format_exact(r.P_B),
        format_exact(r.N_E),
        format_exact(r.N_M),
        format_exact(r.N_B),
        _g17(r.log_m),
        _g17(r.P_E.log_p),
        _g17(r.P_E.log_q),
        _g17(r.P_M.log_p),
        _g17(r.P_B.log_p),
        _g17(r.P_B.log_q),
        "1" if r.S_ambiguous else "0",
    ]


def render_table_csv(reports: Iterable[CollisionReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(_csv_row(r))
    return buf.getvalue()


def render_table(reports: Sequence[CollisionReport]) -> str:
    """Aligned plain-text table for terminals."""
    head = ["q", "P(E)", "S", "P(M)", "P(B)", "N(E)", "N(M)", "N(B)", "methods"]
    body = []
    for r in reports:
        s = format_value(r.S) + ("~" if r.S_ambiguous else "")
        body.append([
            "-" if r.q is None else str(r.q),
            format_value(r.P_E), s, format_value(r.P_M), format_value(r.P_B),
            format_value(r.N_E), format_value(r.N_M), format_value(r.N_B),
            _methods(r),
        ])  # fmt: skip
    widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
    lines = ["  ".join(c.rjust(w) if i < len(head) - 1 else c for i, (c, w) in enumerate(zip(row, widths)))
             for row in [head, *body]]  # fmt: skip
    lines.insert(1, "  ".join("-" * w for w in widths))
    if reports:
        r0 = reports[0]
        lines.append("")
        lines.append(f"n = {r0.n}, k = {r0.k}, S at p = {format_value(r0.p.p)}")
        if any(r.S_ambiguous for r in reports):
            lines.append("~ S above 1e15: the ceiling is not resolvable in double precision (+/-1)")
    return "\n".join(lines) + "\n"


def render_sweep_csv(points: Iterable[SweepPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("p", "S"))
    for pt in points:
        writer.writerow((_g17(pt.p), format_exact(pt.S)))
    return buf.getvalue()


def sweep_gnuplot_script(csv_path: str, q: int = 2) -> str:
    return (
        "set datafile separator ','\n"
        "set logscale xy\n"
        "set xlabel 'p'\n"
        "set ylabel 'peer set size S'\n"
        f"set title 'match at p, q = {q}'\n"
        "set key off\n"
        f"plot '{csv_path}' every ::1 using 1:2 with linespoints\n"
    )
