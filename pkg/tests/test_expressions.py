import cmath

from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from verlinde_lab import expressions as ex
from verlinde_lab.expressions import LPoly

coord = st.complex_numbers(min_magnitude=0.3, max_magnitude=3, allow_nan=False, allow_infinity=False)


def f_direct(z, s, v):
    return (
        z ** 4
        * (1 - v * v / z ** 2) ** 2
        * (1 + s / (z * v))
        * (1 + s * v * z)
        / ((1 - v * v * z * z) ** 2 * (1 + s * v / z) * (1 + s * z / v))
    )


def cross_equal(a, b):
    (na, da), (nb, db) = a, b
    return (na * db - nb * da).is_zero()


def test_f_times_f_of_inverse_is_one():
    f = ex.bethe_f()
    num, den = (f * f.inv_z()).to_lpoly_pair()
    assert (num - den).is_zero()


def test_h_over_f_is_inversion_invariant():
    ld, pq = ex.h_over_f()
    ld_n, ld_d = ld.to_lpoly_pair()
    pq_n, pq_d = pq.to_lpoly_pair()
    n, d = ld_n * pq_n, ld_d * pq_d
    assert cross_equal((n, d), (n.subs_z_inverse(), d.subs_z_inverse()))


def test_logterms_pair_matches_evaluation():
    num, den = ex.logderiv().to_lpoly_pair()
    z, s, v = mpq(3, 7), mpq(2, 5), mpq(5, 11)
    direct = ex.logderiv().evaluate(complex(z), complex(s), complex(v))
    assert abs(float(num.evaluate_exact(z, s, v) / den.evaluate_exact(z, s, v)) - direct.real) < 1e-12


@settings(max_examples=40, deadline=None)
@given(coord, st.floats(0.01, 0.3), st.floats(0.05, 0.4))
def test_factored_f_matches_direct_formula(z, s, t):
    v = t ** 0.5
    assert cmath.isclose(ex.f_numeric(z, s, v), f_direct(z, s, v), rel_tol=1e-9)


@settings(max_examples=40, deadline=None)
@given(coord, st.floats(0.01, 0.3), st.floats(0.05, 0.4))
def test_logderiv_is_z_dlog_f(z, s, t):
    v = t ** 0.5
    h = 1e-6 * abs(z)
    numeric = z * (cmath.log(f_direct(z + h, s, v) / f_direct(z - h, s, v))) / (2 * h)
    assert cmath.isclose(ex.logderiv_numeric(z, s, v), numeric, rel_tol=1e-5, abs_tol=1e-6)


def test_bracket_is_logderiv():
    assert cross_equal(ex.main_bracket().to_lpoly_pair(), ex.logderiv().to_lpoly_pair())


def test_w2_and_w_sigma_shapes():
    z, s, v = mpq(2), mpq(1, 3), mpq(1, 5)
    w2 = ex.w2_factored().evaluate(complex(z), complex(s), complex(v))
    expect = (s * z + v) * (v * z + s) / ((s * z * v + 1) * (s * v + z))
    assert abs(w2 - complex(float(expect))) < 1e-14


def test_lpoly_cleared_and_inverse():
    p = LPoly({(0, 0, -2): 1, (1, 0, 3): mpq(1, 2)})
    c = p.cleared()
    assert min(e[2] for e in c.t) == 0
    assert p.subs_z_inverse().subs_z_inverse() == p
