import csv
import io
import math
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from biocollide.model import load_catalog, uniform_catalog
from biocollide.numerics import DomainError, ExtReal, Probability
from biocollide.report import (
    CSV_COLUMNS,
    build_report,
    build_report_for_catalog,
    default_p_grid,
    format_exact,
    format_value,
    parse_value,
    render_sweep_csv,
    render_table,
    render_table_csv,
    sweep_match_at_p,
    table2,
)


class TestFormat:
    @pytest.mark.parametrize(
        "x, text",
        [
            (5.6827e-4, "5.68e-04"),
            (0.049468, "0.0495"),
            (1.0, "1.000"),
            (0.9999, "1.000"),
            (9.9999999990e-35, "1e-34"),
            (1.0000000005e35, "1e+35"),
            (4.9999999995e-25, "5.00e-25"),
            (17593, "1.76e+04"),
            (20.19964897, "20.2"),
            (1759.72, "1760"),
            (0.0, "0"),
            (-3.14159, "-3.14"),
        ],
    )
    def test_examples(self, x, text):
        assert format_value(x) == text

    def test_saturated_probability(self):
        assert format_value(Probability.from_log_q(-2842709.6)) == "0.9999+"
        assert format_value(Probability.one()) == "1.000"
        assert format_value(Probability.from_p(0.99)) == "0.990"

    def test_beyond_double_range(self):
        assert format_value(ExtReal.from_log(1000 * math.log(10))) == "1e+1000"
        assert format_value(Probability.from_log_p(-2000 * math.log(10) + math.log(2.5))) == "2.50e-2000"

    @given(st.floats(min_value=1e-300, max_value=1e300))
    def test_round_trip(self, x):
        text = format_value(x)
        back = parse_value(text)
        mant, exp = ExtReal.from_float(x).sci()
        if 1e-3 <= back <= 9999 and "e" not in text:
            decimals = len(text.split(".")[1]) if "." in text else 0
            unit = 10.0**-decimals
        else:
            unit = 10.0 ** (exp - 2) if abs(back - x) < 10.0 ** (exp - 1) else 10.0 ** (exp - 1)
        assert abs(back - x) <= 0.5 * unit * (1 + 1e-9)

    def test_exact_format(self):
        assert format_exact(ExtReal.from_int(17593)) == "17593"
        text = format_exact(Probability.from_p(0.1))
        assert len(text.replace("0.", "", 1).lstrip("0")) == 17
        assert float(text) == pytest.approx(0.1, rel=1e-15)
        big = Decimal(format_exact(ExtReal.from_log(1000 * math.log(10))))
        assert abs(big / Decimal("1e1000") - 1) < Decimal("1e-12")


class TestBuildReport:
    def test_q10(self):
        r = build_report(10, 44, 10**10, 1e-9)
        assert [format_value(v) for v in (r.P_E, r.S, r.P_M, r.P_B)] == ["1e-34", "1e+35", "1e-44", "5.00e-25"]
        assert r.S_ambiguous

    def test_q7(self):
        r = build_report(7, 44, 10**10, 1e-9)
        assert [format_value(v) for v in (r.P_E, r.S, r.P_M, r.P_B)] == [
            "6.54e-28", "1.53e+28", "6.54e-38", "3.27e-18",
        ]  # fmt: skip

    def test_single_binary_feature(self):
        r = build_report(2, 1, 2, 0.5)
        assert r.P_M.p == pytest.approx(0.5)
        assert r.P_B.p == pytest.approx(0.5)
        assert int(r.S) == 1

    def test_reciprocals(self):
        r = build_report(4, 44, 10**10, 1e-9)
        for prob, count in ((r.P_E, r.N_E), (r.P_M, r.N_M), (r.P_B, r.N_B)):
            assert float(count) * prob.p == pytest.approx(1.0, rel=1e-12)
            assert 0.0 <= prob.p <= 1.0

    def test_methods_recorded(self):
        r = build_report(2, 44, 10**10, 1e-9)
        assert {k: m.value for k, m in r.methods.items()} == {
            "P_E": "exact", "S": "exact", "P_M": "exact", "P_B": "series_expansion",
        }  # fmt: skip

    def test_catalog(self):
        cat = load_catalog("id,name,levels\na,A,2\nb,B,3\n")
        r = build_report_for_catalog(cat, 3, 0.5)
        assert r.q is None and r.k == 2
        assert r.P_M.p == pytest.approx(1 / 6)
        uni = build_report_for_catalog(uniform_catalog(44, 5), 10**10, 1e-9)
        assert format_value(uni.P_B) == "8.80e-12"

    @pytest.mark.parametrize("args", [(1, 44, 10, 0.5), (2, 0, 10, 0.5), (2, 44, 1, 0.5), (2, 44, 10, 1.0)])
    def test_invalid(self, args):
        with pytest.raises(DomainError):
            build_report(*args)


class TestTable2:
    def test_defaults(self):
        rows = table2()
        assert [r.q for r in rows] == [10, 9, 8, 7, 6, 5, 4, 3, 2]

    def test_q3(self):
        (r,) = table2(q_range=[3])
        assert format_value(r.P_B) == "0.0495"

    def test_q2(self):
        (r,) = table2(q_range=[2])
        assert format_value(r.P_B) == "0.9999+"
        assert r.P_B.log_q == pytest.approx(-2842709.6249, rel=1e-10)

    def test_empty(self):
        with pytest.raises(DomainError):
            table2(q_range=[])


class TestSweep:
    def test_points(self):
        pts = sweep_match_at_p(2, 44, [1e-9, 1e-6])
        assert format_value(pts[0].S) == "1.76e+04"
        assert float(pts[1].S) > 1.7e7

    def test_e_fold(self):
        (pt,) = sweep_match_at_p(2, 10, [Probability.from_log_q(-1.0)])
        assert int(pt.S) == 2**10

    def test_default_grid(self):
        pts = sweep_match_at_p()
        assert len(pts) == 40
        assert pts[0].p == pytest.approx(1e-9) and pts[-1].p == pytest.approx(0.9999)
        for a, b in zip(pts, pts[1:]):
            assert a.p < b.p and a.S < b.S

    def test_small_p_linear(self):
        pts = sweep_match_at_p(2, 44, default_p_grid(30, 1e-9, 1e-3))
        ratios = [float(pt.S) / pt.p for pt in pts]
        assert max(ratios) / min(ratios) - 1 < 2e-3

    def test_rejects_p_one(self):
        with pytest.raises(DomainError):
            sweep_match_at_p(2, 44, [1.0])

    def test_csv(self):
        text = render_sweep_csv(sweep_match_at_p(2, 44, [1e-9]))
        assert text == "p,S\n1.0000000000000001e-09,17593\n"


class TestRender:
    def test_csv_shape(self):
        text = render_table_csv(table2())
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 10
        assert "\r" not in text
        q2 = dict(zip(rows[0], rows[-1]))
        assert q2["P_B"] == "0.9999+"
        assert float(q2["log_one_minus"]) == pytest.approx(-2842709.6249, rel=1e-10)
        assert q2["S_exact"] == "17593"

    def test_csv_deterministic(self):
        assert render_table_csv(table2()) == render_table_csv(table2())

    def test_human(self):
        text = render_table(table2())
        assert "0.9999+" in text and "0.0495" in text
        assert len(text.splitlines()) >= 11
