import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from biocollide.model import (
    CatalogError,
    FeatureCatalog,
    FeatureSpec,
    PopulationModel,
    builtin_catalog,
    heterogeneous_log_m,
    load_catalog,
    serialize_catalog,
    uniform_catalog,
)


def test_uniform_catalog():
    cat = uniform_catalog(44, 10)
    assert cat.k == 44
    assert cat.log_m == pytest.approx(44 * math.log(10), rel=1e-12)
    assert cat.log_m == pytest.approx(101.31374, abs=1e-5)
    assert uniform_catalog(1, 2).log_m == pytest.approx(math.log(2))


def test_uniform_catalog_q3():
    cat = uniform_catalog(44, 3)
    assert cat.log_m == pytest.approx(48.33894, abs=1e-5)
    assert cat.m.exact == 3**44  # repeated squaring gives 984770902183611232881
    assert float(cat.m) == pytest.approx(9.85e20, rel=1e-3)


@pytest.mark.parametrize("k,q", [(0, 10), (44, 1), (3, 0)])
def test_uniform_catalog_rejects(k, q):
    with pytest.raises(CatalogError):
        uniform_catalog(k, q)


def test_builtin_catalog():
    cat = builtin_catalog()
    assert cat.k == 44
    assert cat.uniform_levels == 10
    assert cat.log_m == pytest.approx(44 * math.log(10), rel=1e-12)
    ids = [f.id for f in cat.features]
    assert ids[16] == "f0"  # feature number 17
    assert ids[5:10] == ["b1", "b2", "b3", "b4", "b5"]
    assert ids[11:16] == ["f1", "f2", "f3", "f4", "f5"]
    assert builtin_catalog(levels=3).log_m == pytest.approx(44 * math.log(3))


def test_heterogeneous():
    cat = load_catalog("id,name,levels\na,A,2\nb,B,3\n")
    assert heterogeneous_log_m(cat) == pytest.approx(math.log(6))
    assert cat.uniform_levels is None
    assert heterogeneous_log_m(uniform_catalog(44, 8)) == pytest.approx(132 * math.log(2), rel=1e-12)


def test_empty_file():
    with pytest.raises(CatalogError, match="empty"):
        load_catalog("")
    with pytest.raises(CatalogError, match="no features"):
        load_catalog("# only a comment\nid,name,levels\n")


def test_duplicate_id_named():
    text = "id,name,levels\nf0,Pitch,10\njitter,Jitter,10\nf0,Again,10\n"
    with pytest.raises(CatalogError, match="'f0'") as info:
        load_catalog(text)
    assert info.value.line == 4


@pytest.mark.parametrize(
    "row, fragment",
    [
        ("a,A,1", "levels must be >= 2"),
        ("a,A,x", "not an integer"),
        ("a,A", "expected 3 fields"),
        (",A,3", "empty feature id"),
    ],
)
def test_bad_rows(row, fragment):
    with pytest.raises(CatalogError, match=fragment) as info:
        load_catalog(f"id,name,levels\n{row}\n")
    assert info.value.line == 2


def test_header_required():
    with pytest.raises(CatalogError, match="header"):
        load_catalog("a,A,3\n")


def test_quoted_names_with_commas():
    cat = load_catalog('id,name,levels\nx,"Energy ratio, low/high",4\n')
    assert cat.features[0].name == "Energy ratio, low/high"
    assert load_catalog(serialize_catalog(cat)) == cat


def test_spec_validation():
    with pytest.raises(CatalogError):
        FeatureSpec("a", "A", 1)
    with pytest.raises(CatalogError):
        FeatureCatalog((FeatureSpec("a", "A", 2), FeatureSpec("a", "B", 3)))
    with pytest.raises(ValueError):
        PopulationModel(0)
    assert PopulationModel(10**10).n == 10**10


_names = st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc", "Zl", "Zp")), max_size=20)
_catalogs = st.lists(
    st.tuples(st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True), _names, st.integers(2, 1000)),
    min_size=1,
    max_size=30,
    unique_by=lambda t: t[0],
).map(lambda rows: FeatureCatalog(tuple(FeatureSpec(i, n.strip(), q) for i, n, q in rows)))


@given(_catalogs)
def test_serialize_round_trip(cat):
    assert load_catalog(serialize_catalog(cat)) == cat


@given(_catalogs, st.randoms())
def test_permutation_invariance(cat, rnd):
    feats = list(cat.features)
    rnd.shuffle(feats)
    assert FeatureCatalog(tuple(feats)).log_m == pytest.approx(cat.log_m, rel=1e-12)


@given(st.integers(1, 200), st.integers(2, 1000))
def test_uniform_log_m(k, q):
    assert heterogeneous_log_m(uniform_catalog(k, q)) == pytest.approx(k * math.log(q), rel=1e-12)
