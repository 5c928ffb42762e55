"""Command-line interface.

Usage:
    biocollide table                                   # the q = 10..2 collision table
    biocollide compute --q 5 --k 44 --n 1e10 --p 1e-9  # one report
    biocollide compute --catalog my.csv --n 1e10       # per-feature level counts
    biocollide sweep --q 2 --points 40                 # S versus p data
    biocollide simulate --metric population --m 365 --n 23 --trials 1e6 --seed 42
    biocollide catalog validate my.csv

Data goes to stdout (or ``--output``), diagnostics to stderr. Exit status is 2
for invalid input and 3 when the requested accuracy cannot be guaranteed.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import __version__
from .collision import UnboundedError
from .model import CatalogError, builtin_catalog, load_catalog_file
from .numerics import AccuracyError, DomainError
from .oracle import Metric, WorkBudgetError, analytic_value, simulate
from .report import (
    DEFAULT_Q_RANGE,
    build_report,
    build_report_for_catalog,
    default_p_grid,
    format_exact,
    format_value,
    render_sweep_csv,
    render_table,
    render_table_csv,
    sweep_gnuplot_script,
    sweep_match_at_p,
    table2,
)

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ACCURACY = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # one line, no usage dump
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def integer(text: str) -> int:
    """Accept ``10000000000``, ``10_000_000_000`` and integral ``1e10``."""
    try:
        d = Decimal(text.strip())
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not d.is_finite() or d != d.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(d)


def _bounded_int(least: int):
    def parse(text: str) -> int:
        v = integer(text)
        if v < least:
            raise argparse.ArgumentTypeError(f"must be >= {least}, got {v}")
        return v

    return parse


def probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return v


def _q_list(text: str) -> list[int]:
    parse = _bounded_int(2)
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty q list")
    return [parse(t) for t in items]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="biocollide", description="Voice-collision probabilities over quantized feature spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def io_opts(p: argparse.ArgumentParser, default_format: str = "human") -> None:
        p.add_argument("--format", choices=("human", "csv"), default=default_format)
        p.add_argument("--output", type=Path, help="write data here instead of stdout")

    p = sub.add_parser("compute", help="one collision report")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--q", type=_bounded_int(2), help="levels per feature (default 10)")
    src.add_argument("--catalog", type=Path, help="catalog file with per-feature levels")
    p.add_argument("--k", type=_bounded_int(1), default=44, help="number of features (with --q)")
    p.add_argument("--levels", type=_bounded_int(2), help="override every catalog row's levels")
    p.add_argument("--n", type=_bounded_int(2), default=10**10, help="population size")
    p.add_argument("--p", type=probability, default=1e-9, help="target probability for S")
    io_opts(p)

    p = sub.add_parser("table", help="collision metrics for a range of q")
    p.add_argument("--n", type=_bounded_int(2), default=10**10)
    p.add_argument("--k", type=_bounded_int(1), default=44)
    p.add_argument("--p", type=probability, default=1e-9)
    p.add_argument("--q-range", type=_q_list, default=list(DEFAULT_Q_RANGE), help="comma list, e.g. 10,9,8")
    io_opts(p)

    p = sub.add_parser("sweep", help="peer-set size S against p")
    p.add_argument("--q", type=_bounded_int(2), default=2)
    p.add_argument("--k", type=_bounded_int(1), default=44)
    p.add_argument("--p-min", type=probability, default=1e-9)
    p.add_argument("--p-max", type=probability, default=0.9999)
    p.add_argument("--points", type=_bounded_int(2), default=40)
    p.add_argument("--gnuplot", type=Path, help="also write a gnuplot script here")
    io_opts(p, default_format="csv")

    p = sub.add_parser("simulate", help="Monte Carlo estimate next to the analytic value")
    p.add_argument("--metric", choices=[m.value for m in Metric], required=True)
    p.add_argument("--m", type=_bounded_int(1), required=True, help="number of cells")
    p.add_argument("--n", type=_bounded_int(1), default=2)
    p.add_argument("--trials", type=_bounded_int(1), default=10**6)
    p.add_argument("--seed", type=_bounded_int(0), default=0)
    p.add_argument("--workers", type=_bounded_int(1), default=1)
    io_opts(p)

    p = sub.add_parser("catalog", help="catalog utilities")
    csub = p.add_subparsers(dest="catalog_command", required=True)
    v = csub.add_parser("validate", help="check a catalog file and print ln m and m")
    v.add_argument("file", type=Path, nargs="?")
    v.add_argument("--builtin", action="store_true", help="validate the shipped 44-feature catalog")
    v.add_argument("--levels", type=_bounded_int(2))
    io_opts(v)
    return parser


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _cmd_compute(args: argparse.Namespace) -> str:
    if args.catalog is not None:
        report = build_report_for_catalog(load_catalog_file(args.catalog, levels=args.levels), args.n, args.p)
    else:
        report = build_report(args.q if args.q is not None else 10, args.k, args.n, args.p)
    return render_table_csv([report]) if args.format == "csv" else render_table([report])


def _cmd_table(args: argparse.Namespace) -> str:
    reports = table2(args.n, args.k, args.p, args.q_range)
    return render_table_csv(reports) if args.format == "csv" else render_table(reports)


def _cmd_sweep(args: argparse.Namespace) -> str:
    if args.p_min >= args.p_max:
        raise DomainError(f"--p-min must be below --p-max ({args.p_min} >= {args.p_max})")
    points = sweep_match_at_p(args.q, args.k, default_p_grid(args.points, args.p_min, args.p_max))
    if args.gnuplot is not None:
        data = str(args.output) if args.output is not None else "sweep.csv"
        args.gnuplot.write_text(sweep_gnuplot_script(data, args.q), encoding="utf-8")
    if args.format == "csv":
        return render_sweep_csv(points)
    lines = [f"{'p':>10}  {'S':>10}"] + [f"{format_value(pt.p):>10}  {format_value(pt.S):>10}" for pt in points]
    return "\n".join(lines) + "\n"


def _cmd_simulate(args: argparse.Namespace) -> str:
    est = simulate(args.metric, args.m, args.n, args.trials, args.seed, workers=args.workers)
    analytic = analytic_value(args.metric, args.m, args.n).p
    z = est.z_score(analytic)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("metric", "m", "n", "trials", "seed", "estimate", "std_error", "analytic", "z"))
        w.writerow((est.metric.value, est.m, est.n, est.trials, est.seed,
                    f"{est.estimate:.17g}", f"{est.std_error:.17g}", f"{analytic:.17g}", f"{z:.6g}"))  # fmt: skip
        return buf.getvalue()
    return (
        f"metric     {est.metric.value}\n"
        f"m, n       {est.m}, {est.n}\n"
        f"trials     {est.trials} (seed {est.seed})\n"
        f"estimate   {est.estimate:.6f} +/- {est.std_error:.6f}\n"
        f"analytic   {analytic:.6f}\n"
        f"z          {z:+.3f}  ({'within' if abs(z) <= 4 else 'OUTSIDE'} 4 sigma)\n"
    )


def _cmd_catalog(args: argparse.Namespace) -> str:
    if args.builtin:
        catalog = builtin_catalog(args.levels)
        name = "builtin:voice_features.csv"
    elif args.file is not None:
        catalog = load_catalog_file(args.file, levels=args.levels)
        name = str(args.file)
    else:
        raise DomainError("catalog validate needs FILE or --builtin")
    levels = catalog.uniform_levels
    m = catalog.m
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("catalog", "k", "levels", "log_m", "m"))
        w.writerow((name, catalog.k, "" if levels is None else levels, f"{catalog.log_m:.17g}", format_exact(m)))
        return buf.getvalue()
    return (
        f"catalog    {name}: ok\n"
        f"features   {catalog.k}\n"
        f"levels     {levels if levels is not None else 'heterogeneous'}\n"
        f"ln m       {catalog.log_m:.12g}\n"
        f"m          {m.exact if m.exact is not None and m.exact < 10**15 else format_value(m)}\n"
    )


_COMMANDS = {
    "compute": _cmd_compute,
    "table": _cmd_table,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "catalog": _cmd_catalog,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = _COMMANDS[args.command](args)
        _emit(text, getattr(args, "output", None))
    except (AccuracyError, OverflowError) as exc:
        print(f"biocollide: accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (CatalogError, DomainError, UnboundedError, WorkBudgetError, ValueError, OSError) as exc:
        print(f"biocollide: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
