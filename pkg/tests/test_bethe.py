import cmath

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from verlinde_lab import bethe as bt
from verlinde_lab import expressions as ex


def q(g=2, t=0.1, s=0.0, k=2, group="SU11", kprime=1):
    return bt.BetheQuery(group, g, k, t, s, kprime)


def cross_equal(a, b):
    (na, da), (nb, db) = a, b
    return (na * db - nb * da).is_zero()


def test_query_validation():
    with pytest.raises(ValueError):
        q(t=1.0)
    with pytest.raises(ValueError):
        q(group="SL2R", s=0.1)
    with pytest.raises(ValueError):
        q(k=-1)
    with pytest.raises(ValueError):
        q(group="G2")


@pytest.mark.parametrize("t", [0.05, 0.1, 0.2, 0.5])
def test_s_zero_roots_are_fourth_roots_of_unity(t):
    sol = bt.solve_bethe(q(t=t))
    assert len(sol.roots) == 4 and sol.removed_zero_order == 1
    for r in (1, -1, 1j, -1j):
        assert min(abs(z - r) for z in sol.values) < 1e-10
    assert sol.max_residual <= 1e-10


def test_quartic_factorization_is_exact():
    assert bt.quartic_factorization_holds()


def test_root_count_matches_degree():
    sol = bt.solve_bethe(q(t=0.1, s=0.05))
    assert sol.degree == 6
    assert len(sol.roots) == sol.degree
    assert not sol.flags["non_regular"]


@settings(max_examples=25, deadline=None)
@given(st.floats(0.03, 0.3), st.floats(0.005, 0.1), st.integers(1, 4))
def test_residuals_and_weyl_closure(t, s, k):
    sol = bt.solve_bethe(q(t=t, s=s, k=k))
    assert all(r.residual <= 1e-10 for r in sol.roots)
    assert bt.weyl_closure_defect(sol) < 1e-8
    zs = sol.values
    assert all(abs(a - b) > 1e-8 for n, a in enumerate(zs) for b in zs[n + 1 :])


def test_lhs_at_level_two_is_bethe_function():
    assert bt.bethe_lhs_factored(2) == ex.bethe_f()


def test_hessian_at_level_two_is_logderiv():
    assert cross_equal(bt.hessian_logterms(2).to_lpoly_pair(), ex.logderiv().to_lpoly_pair())
    z, s, v = 0.7 + 0.2j, 0.03, 0.3
    assert cmath.isclose(bt.hessian(z, 2, s, v), ex.logderiv_numeric(z, s, v), rel_tol=1e-12)


def test_theta_prime_is_f_over_h():
    z, s, v = 0.9 - 0.4j, 0.05, 0.25
    assert cmath.isclose(bt.theta_prime(z, 2, s, v), ex.f_numeric(z, s, v) / ex.h_numeric(z, s, v), rel_tol=1e-12)


@pytest.mark.parametrize("g", [2, 3, 4])
@pytest.mark.parametrize("t", [0.05, 0.1, 0.2])
def test_closed_form(g, t):
    full = bt.stack_index_su11(q(g=g, t=t))
    cf = bt.closed_form_full(g, t)
    assert abs(full - cf) <= 1e-10 * abs(cf)
    assert bt.stack_index_su11(q(g=g, t=t), prime=True) == full / 2


def test_closed_form_exact_matches_exact_real_sum():
    for g in (2, 3):
        assert bt.verlinde_real_exact("SL2R", g, mpq(1, 10)) == bt.closed_form_full(g, mpq(1, 10))


def test_reality_under_conjugation():
    sol = bt.solve_bethe(q(g=3, t=0.15, s=0.04))
    total = sum(bt.theta_prime(z, 2, 0.04, 0.15 ** 0.5) ** -2 for z in sol.values)
    conj = sum(bt.theta_prime(z.conjugate(), 2, 0.04, 0.15 ** 0.5) ** -2 for z in sol.values)
    assert abs(total - conj) < 1e-9 * abs(total)
    assert abs(total.imag) < 1e-9 * abs(total)


@pytest.mark.parametrize("g", [2, 3])
@pytest.mark.parametrize("kprime", [1, 2, 3])
def test_u11_ratio(g, kprime):
    exact = bt.verlinde_real_exact("U11", g, "1/7", kprime, two_variable=True)
    assert exact == kprime ** g * bt.verlinde_real_exact("SL2R", g, "1/7")
    num = bt.u11_two_variable(q(g=g, group="U11", t=1 / 7, kprime=kprime))
    sl = bt.verlinde_real(q(g=g, group="SL2R", t=1 / 7))
    assert abs(num / sl - kprime ** g) < 1e-12 * kprime ** g


def test_sl2r_agrees_with_su11_at_s_zero():
    assert cmath.isclose(bt.verlinde_real(q(g=3, group="SL2R", t=0.2)), bt.stack_index_su11(q(g=3, t=0.2)), rel_tol=1e-13)


def test_series_s_zero_part_is_half_closed_form():
    ser = bt.stack_index_series(2, 12)
    assert ser.s_coefficient(0).same_as(bt.closed_form_series(2, 12).shifted(0, mpq(1, 2)))
    assert ser.odd_part_vanishes() and ser.max_s_degree() == 4


def test_series_matches_bethe_on_grid():
    rows = bt.compare_stack(2, order_t=30)
    assert len(rows) == 9
    assert all(r.verdict == "pass" for r in rows), [r.to_json_obj() for r in rows if r.verdict != "pass"]


def test_error_budget_shrinks_with_order():
    tails = [bt.evaluate_sgraded(bt.stack_index_series(2, T), 0.2, 0.05).tail for T in (10, 20, 30)]
    assert tails[0] > tails[1] > tails[2]
    errs = []
    for T in (10, 20, 30):
        val = bt.evaluate_sgraded(bt.stack_index_series(2, T), 0.2, 0).value
        errs.append(abs(val - bt.closed_form_full(2, 0.2) / 2))
    assert errs[0] > errs[1] > errs[2]


def test_budget_marks_inconclusive():
    rows = bt.compare_stack(2, grid=[(0.9, 0.05)], order_t=4)
    assert rows[0].verdict == "inconclusive"


@pytest.mark.parametrize("g,j", [(2, 0), (3, 0), (3, 1)])
def test_mainc(g, j):
    rep = bt.verify_mainc(g, j, 10)
    assert rep.passed, rep.witness


def test_mainc_range():
    with pytest.raises(ValueError):
        bt.verify_mainc(3, 2, 6)


def test_common_numerator_denominator_zeros_are_filtered():
    # s = -1 makes 1 + s/(vz) and 1 + sz/v vanish at z = 1/v and z = v
    sol = bt.solve_bethe(q(t=0.1, s=-1.0))
    assert len(sol.flags["non_regular"]) == 4
    v = 0.1 ** 0.5
    assert all(min(abs(z - v), abs(z - 1 / v)) < 1e-6 for z in sol.flags["non_regular"])


@pytest.mark.parametrize("k", [1, 3, 4])
def test_other_levels_solve_cleanly(k):
    sol = bt.solve_bethe(q(t=0.25, s=0.0625, k=k))
    assert len(sol.roots) == sol.degree == 6 + 2 * abs(k - 2)
    assert sol.max_residual <= 1e-10
