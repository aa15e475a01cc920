import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from verlinde_lab import expressions as ex
from verlinde_lab.cohomology import IndexQuery, direct_index
from verlinde_lab.residue import (
    CHARTS,
    IndexSeries,
    UnsupportedComponent,
    consistency_main_vs_compact,
    index_lambda_s,
    index_pair,
    localize,
    total_residue,
)

ORDERS = (6, 3, 8)

# Frozen from the residue engine and confirmed against direct integration
# over the symmetric product (see test_cohomology for the live cross-check).
G2_00 = {2: 16, 4: 48, 6: 96, 8: 160, 10: 240, 12: 336}
G3_01 = {2: 384, 4: 3328, 6: 14592, 8: 45312, 10: 113792}
G3_11_HEAD = [396, 1344, 8856, 17472, 62116, 94080, 254256]


def test_f_valuation_at_s_zero_is_two():
    loc = localize(ex.bethe_f(), "+v", (6, 0, 4)).normalize()
    assert loc.shift[0] == 2


def test_logderiv_localizes_by_chain_rule():
    f = localize(ex.bethe_f(), "+v", ORDERS)
    ld = localize(ex.logderiv(), "+v", ORDERS)
    assert ld.first_difference(f.log_derivative() * 2) is None


@pytest.mark.parametrize("chart", ["+v", "-v"])
def test_f_times_f_inverse_localizes_to_one(chart):
    prod = localize(ex.bethe_f(), chart, ORDERS) * localize(ex.bethe_f().inv_z(), chart, ORDERS)
    assert prod.terms() == {(0, 0, 0): 1}


def test_frozen_g2_index():
    ser = index_pair(2, 0, 0, 12)
    assert ser.coeffs == {k: mpq(c) for k, c in G2_00.items()}


def test_frozen_g3_indices():
    assert index_pair(3, 0, 1, 10).coeffs == {k: mpq(c) for k, c in G3_01.items()}
    assert index_pair(3, 1, 0, 10).coeffs == index_pair(3, 0, 1, 10).coeffs
    s11 = index_pair(3, 1, 1, 6)
    assert [int(s11[k]) for k in range(7)] == G3_11_HEAD


def test_j_beyond_rank_vanishes():
    assert index_pair(2, 0, 3, 10).is_zero()


def test_matches_direct_integration_g2():
    assert index_pair(2, 0, 0, 8).same_as(direct_index(IndexQuery(2, 0, 0, 8)))


def test_unsupported_component():
    with pytest.raises(UnsupportedComponent):
        index_pair(3, 2, 0, 4)
    assert isinstance(index_pair(3, 2, 0, 4, formal=True), IndexSeries)
    with pytest.raises(ValueError):
        index_pair(1, 0, 0, 4)


@pytest.mark.parametrize("g", [2, 3])
def test_lambda_s_structure(g):
    for i in range(g - 1):
        graded = index_lambda_s(g, i, 6)
        assert graded.odd_part_vanishes()
        assert graded.max_s_degree() <= 2 * (2 * g - 2)
        for j in range(2 * g - 1):
            assert graded.lambda_component(j).same_as(index_pair(g, i, j, 6))


@pytest.mark.parametrize("g,i", [(2, 0), (3, 0), (3, 1)])
def test_main_and_compact_forms_agree(g, i):
    rep = consistency_main_vs_compact(g, i, 6)
    assert rep.passed, rep.detail


def test_minus_chart_by_reflection_equals_direct_expansion():
    for i in range(2):
        a = index_pair(3, i, 1, 6)
        b = index_pair(3, i, 1, 6, direct_minus=True)
        assert a.same_as(b)


def test_extra_zeros_silent_below_g_minus_one():
    rt = total_residue(3, 0, 4, 10, charts=["-s/v", "-1/(sv)"])
    assert rt == {}


def test_index_series_json_roundtrip():
    ser = index_pair(3, 0, 1, 8)
    back = IndexSeries.from_json_obj(__import__("json").loads(ser.to_json()))
    assert back.coeffs == ser.coeffs and back.order == ser.order


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(-3, 8), st.integers(-50, 50), max_size=6), st.integers(-2, 3))
def test_index_series_shift_roundtrip(coeffs, k):
    ser = IndexSeries(coeffs, 8)
    assert ser.shifted(k).shifted(-k).same_as(ser)
    assert (ser - ser).is_zero()


def test_charts_cover_all_zeros():
    assert set(CHARTS) == {"+v", "-v", "-s/v", "-1/(sv)"}
