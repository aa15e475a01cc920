"""Checks of the structural identities satisfied by the indices.

Every check returns an :class:`IdentityReport`.  A failing report always
carries a witness that reproduces the failure: an evaluation point, a
``(g, i, j)`` triple with the first differing power of ``t``, or the
offending term of an exponent.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from typing import Any

from gmpy2 import mpq

from . import cohomology as co
from . import expressions as ex
from .expressions import Factored, LogTerms, LPoly
from .residue import IndexSeries, index_pair
from .series import MSeries, VarRegistry, rat, rat_str

DEFAULT_SEED = 20240601


@dataclass
class IdentityReport:
    name: str
    passed: bool
    witness: Any = None
    params: dict = field(default_factory=dict)
    detail: str = ""
    checked: int = 0
    extra: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "witness": _jsonable(self.witness),
            "params": _jsonable(self.params),
            "detail": self.detail,
            "checked": self.checked,
            "extra": _jsonable(self.extra),
        }

    def __bool__(self) -> bool:
        return self.passed


def _jsonable(obj):
    if isinstance(obj, type(mpq())):
        return rat_str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, IndexSeries):
        return obj.to_json_obj()
    if hasattr(obj, "to_json_obj"):
        return obj.to_json_obj()
    return obj


# ---------------------------------------------------------------------------
# the functional equation in the coordinates (z^2, zs)


def _eval_zp(expr, Z: mpq, P: mpq, v: mpq) -> mpq:
    """Evaluate an expression that depends on ``z`` and ``s`` only through ``z^2`` and ``zs``."""

    def mono(a: int, b: int, k: int) -> mpq:
        if (k - a) % 2:
            raise ValueError(f"s^{a} z^{k} is not a function of z^2 and zs")
        return P ** a * Z ** ((k - a) // 2) * v ** b

    if isinstance(expr, Factored):
        val = expr.const * mono(*expr.mono)
        for at, m in expr.atoms.items():
            val *= (1 + at.c * mono(*at.exps)) ** m
        return val
    if isinstance(expr, LogTerms):
        val = expr.const
        for at, w in expr.terms.items():
            u = at.c * mono(*at.exps)
            val += w * u / (1 + u)
        return val
    raise TypeError(type(expr).__name__)


def _eval_exact(expr, z: mpq, s: mpq, v: mpq) -> mpq:
    return _eval_zp(expr, z * z, z * s, v)


def h_exact(z: mpq, s: mpq, v: mpq) -> mpq:
    return _eval_exact(ex.logderiv(), z, s, v) * _eval_exact(ex.bethe_f() * ex.p_factor() / ex.q_factor(), z, s, v)


def h_zp(Z: mpq, P: mpq, v: mpq) -> mpq:
    return _eval_zp(ex.logderiv(), Z, P, v) * _eval_zp(ex.bethe_f() * ex.p_factor() / ex.q_factor(), Z, P, v)


def functional_equation_at(z, s, v) -> tuple[bool, dict]:
    """Both functional equations at one exact point; raises ZeroDivisionError at poles."""
    z, s, v = rat(z), rat(s), rat(v)
    f = ex.bethe_f()
    w2 = _eval_exact(ex.w2_factored(), z, s, v)
    sigma2 = _eval_exact(f, z, s, v)
    wsigma = _eval_exact(ex.w_sigma_factored(), z, s, v)
    branch_ok = wsigma * wsigma == w2 * sigma2
    f_new = _eval_zp(f, w2, wsigma, v)
    ok_f = f_new == s * s
    if s == 0:
        # w^2 = v^2 is a pole of h; only the f-equation is meaningful
        ok_h = None
    else:
        ok_h = h_zp(w2, wsigma, v) == h_exact(z, s, v)
    return branch_ok and ok_f and ok_h is not False, {
        "point": [rat_str(z), rat_str(s), rat_str(v)],
        "branches": branch_ok,
        "f_equation": ok_f,
        "h_equation": ok_h,
    }


def _random_rational(rng: random.Random, bound: int = 1000) -> mpq:
    while True:
        num = rng.randint(-bound, bound)
        den = rng.randint(1, bound)
        if num:
            return mpq(num, den)


def verify_functional_equation(trials: int = 20, seed: int = DEFAULT_SEED) -> IdentityReport:
    """``f(w, f^(1/2), v) = s^2`` and ``h(w, f^(1/2), v) = h(z, s, v)`` at random exact points."""
    rng = random.Random(seed)
    checked, resampled = 0, 0
    points = []
    while checked < trials:
        z, s, v = (_random_rational(rng) for _ in range(3))
        try:
            ok, info = functional_equation_at(z, s, v)
        except ZeroDivisionError:
            resampled += 1
            continue
        checked += 1
        points.append(info["point"])
        if not ok:
            return IdentityReport("functional_equation", False, info, {"trials": trials, "seed": seed}, "identity fails at witness point", checked, {"resampled": resampled})
    # fixed point from the examples
    ok, info = functional_equation_at(2, mpq(1, 3), mpq(1, 5))
    if not ok:
        return IdentityReport("functional_equation", False, info, {"trials": trials, "seed": seed}, "", checked)
    return IdentityReport("functional_equation", True, None, {"trials": trials, "seed": seed}, "", checked + 1, {"resampled": resampled, "points": points})


# ---------------------------------------------------------------------------
# inversion z -> 1/z as cleared polynomial identities


def _pair_for_h_over_f() -> tuple[LPoly, LPoly]:
    ld_num, ld_den = ex.logderiv().to_lpoly_pair()
    pq_num, pq_den = (ex.p_factor() / ex.q_factor()).to_lpoly_pair()
    return ld_num * pq_num, ld_den * pq_den


def verify_inversion() -> IdentityReport:
    """``f(1/z) f(z) = 1`` and ``(h/f)(1/z) = (h/f)(z)`` after clearing denominators."""
    f = ex.bethe_f()
    num, den = f.to_lpoly_pair()
    inum, iden = num.subs_z_inverse(), den.subs_z_inverse()
    f_ok = (num * inum - den * iden).is_zero()
    hn, hd = _pair_for_h_over_f()
    ihn, ihd = hn.subs_z_inverse(), hd.subs_z_inverse()
    h_ok = (hn * ihd - ihn * hd).is_zero()
    # the factored forms agree with their own inversions too
    fact_ok = (f.inv_z() * f).atoms == {} and (f.inv_z() * f).mono == (0, 0, 0)
    passed = f_ok and h_ok and fact_ok
    witness = None if passed else {"f_inverse": f_ok, "h_over_f": h_ok}
    return IdentityReport("inversion", passed, witness, {}, "", 2)


# ---------------------------------------------------------------------------
# symmetry tables, vanishing and reflection


def symmetry_matrix(g: int, order_t: int) -> dict[tuple[int, int], IndexSeries]:
    return {(i, j): index_pair(g, i, j, order_t) for i in range(g - 1) for j in range(g - 1)}


def verify_symmetry_table(g: int, order_t: int, matrix=None) -> IdentityReport:
    """Transpose symmetry of the ``(g-1) x (g-1)`` matrix of indices."""
    mat = matrix if matrix is not None else symmetry_matrix(g, order_t)
    for (i, j), ser in sorted(mat.items()):
        other = mat[(j, i)]
        k = ser.first_difference(other)
        if k is not None:
            return IdentityReport("symmetry", False, {"g": g, "i": i, "j": j, "t_power": k}, {"g": g, "order_t": order_t}, "", len(mat), {"matrix": mat})
    return IdentityReport("symmetry", True, None, {"g": g, "order_t": order_t}, "", len(mat), {"matrix": mat})


def verify_integrality(g: int, order_t: int, matrix=None) -> IdentityReport:
    """Every entry of the index matrix lies in ``Z[[t]]``.

    Integrality of the coefficients and absence of negative powers of ``t``
    are reported separately in ``extra``; the witness is the first entry that
    breaks either, together with its valuation.
    """
    mat = matrix if matrix is not None else symmetry_matrix(g, order_t)
    bad_den = [(i, j) for (i, j), ser in sorted(mat.items()) if not ser.is_integral()]
    bad_neg = [(i, j) for (i, j), ser in sorted(mat.items()) if not ser.is_power_series()]
    valuations = {key: ser.valuation for key, ser in sorted(mat.items())}
    witness = None
    if bad_den or bad_neg:
        i, j = (bad_den or bad_neg)[0]
        witness = {"g": g, "i": i, "j": j, "valuation": valuations[(i, j)], "leading": str(mat[(i, j)]).split(" + ")[0]}
    return IdentityReport(
        "integrality",
        not (bad_den or bad_neg),
        witness,
        {"g": g, "order_t": order_t},
        "",
        len(mat),
        {"integral_coefficients": not bad_den, "nonnegative_powers": not bad_neg, "negative_power_entries": bad_neg, "valuations": valuations},
    )


def symmetry_csv(mat: dict[tuple[int, int], IndexSeries], order_t: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j"] + [f"t^{k}" for k in range(order_t + 1)])
    for (i, j), ser in sorted(mat.items()):
        w.writerow([i, j] + [str(ser[k].numerator) if ser[k].denominator == 1 else rat_str(ser[k]) for k in range(order_t + 1)])
    return buf.getvalue()


def verify_vanishing(g: int, order_t: int) -> IdentityReport:
    """Formal indices vanish for ``i < 0`` and for ``j`` outside ``[0, 2g-2]``."""
    checked = 0
    cases = [(i, j) for i in (-2, -1) for j in range(0, 2 * g - 1)]
    cases += [(i, j) for i in range(0, 2 * g - 1) for j in (-2, -1, 2 * g - 1, 2 * g)]
    for i, j in cases:
        ser = index_pair(g, i, j, order_t, formal=True)
        checked += 1
        if not ser.is_zero():
            return IdentityReport("vanishing", False, {"g": g, "i": i, "j": j, "t_power": ser.valuation}, {"g": g, "order_t": order_t}, str(ser), checked)
    return IdentityReport("vanishing", True, None, {"g": g, "order_t": order_t}, "", checked)


def verify_reflection(g: int, order_t: int) -> IdentityReport:
    """``i -> 2g-2-i`` and ``j -> 2g-2-j`` leave the formal residue unchanged."""
    top = 2 * g - 2
    table = {(i, j): index_pair(g, i, j, order_t, formal=True) for i in range(top + 1) for j in range(top + 1)}
    for (i, j), ser in sorted(table.items()):
        for name, other in (("i", table[(top - i, j)]), ("j", table[(i, top - j)])):
            k = ser.first_difference(other)
            if k is not None:
                return IdentityReport("reflection", False, {"g": g, "i": i, "j": j, "reflected": name, "t_power": k}, {"g": g, "order_t": order_t}, "", len(table))
    return IdentityReport("reflection", True, None, {"g": g, "order_t": order_t}, "", len(table))


# ---------------------------------------------------------------------------
# Euler forms


def verify_duality(g: int, i: int, j: int, order: int) -> IdentityReport:
    """Scalar relations between Euler forms and tensor indices, and their ratio.

    * ``chi(L_i, Lambda_j) = -t^-1 chi(L_i (x) Lambda_j)``
    * ``chi(Lambda_i, L_j) = t^-g chi(Lambda_i (x) L_j)``
    * ``chi(L_i, Lambda_j) = -t^(g-1) chi(Lambda_i, L_j)``
    * ``c1(K) = 4 c1(L) = (4g-4-4i) eta + 2 theta`` on the component
    """
    if not (0 <= i < g - 1 and 0 <= j < g - 1):
        raise ValueError(f"(i, j) = ({i}, {j}) outside 0 <= i, j < g-1 for g={g}")
    params = {"g": g, "i": i, "j": j, "order": order}
    e1 = co.euler_L_Lambda(g, i, j, order)
    e2 = co.euler_Lambda_L(g, i, j, order)
    ref1 = index_pair(g, i, j, order + 1).shifted(-1, -1).truncated(order)
    ref2 = index_pair(g, j, i, order + g).shifted(-g).truncated(order)
    checks = {
        "L_Lambda_scalar": e1.first_difference(ref1),
        "Lambda_L_scalar": e2.first_difference(ref2),
        "ratio": e1.first_difference(e2.shifted(g - 1, -1).truncated(order)),
    }
    principal = (e1.valuation is None or e1.valuation >= -1) and (e2.valuation is None or e2.valuation >= -g)
    q = co.IndexQuery(g, i)
    lid = co.verify_lidual(q)
    for name, k in checks.items():
        if k is not None:
            return IdentityReport("duality", False, {"check": name, "t_power": k}, params, "", len(checks))
    if not principal:
        return IdentityReport("duality", False, {"check": "principal_part"}, params, "", len(checks))
    if not lid.canonical_passed:
        return IdentityReport("duality", False, {"check": "canonical_class"}, params, "", len(checks))
    return IdentityReport(
        "duality",
        True,
        None,
        params,
        "",
        len(checks) + 1,
        {"euler_L_Lambda": e1, "euler_Lambda_L": e2, "lidual_equivariant": lid.passed},
    )


def verify_lidual(g: int, i: int) -> IdentityReport:
    rep = co.verify_lidual(co.IndexQuery(g, i))
    witness = None if rep.passed else {"exponent": rep.equivariant_exponent, "expected": rep.expected_exponent}
    return IdentityReport("lidual", rep.passed, witness, {"g": g, "i": i}, rep.detail, 1, rep.to_json_obj())


# ---------------------------------------------------------------------------
# dual-path checks


def verify_oracle(g: int, order_t: int) -> IdentityReport:
    """Residue-engine indices against direct integration over ``C_{2i}``."""
    params = {"g": g, "order_t": order_t}
    checked = 0
    for i in range(g - 1):
        graded = co.direct_index(co.IndexQuery(g, i, None, order_t))
        for j in range(2 * g - 1):
            res = index_pair(g, i, j, order_t)
            direct = graded.lambda_component(j)
            checked += 1
            k = res.first_difference(direct)
            if k is not None:
                return IdentityReport("oracle", False, {"g": g, "i": i, "j": j, "t_power": k}, params, f"{res} != {direct}", checked)
    return IdentityReport("oracle", True, None, params, "", checked)


def random_zagier_case(rng: random.Random) -> tuple[list[mpq], list[mpq], int, int]:
    g = rng.randint(1, 5)
    n = rng.randint(0, 6)
    draw = lambda: [mpq(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(n + 1)]
    return draw(), draw(), n, g


def zagier_case(A: list, B: list, n: int, g: int) -> tuple[mpq, mpq]:
    lhs = co.integrate_Cn(co.zagier_as_class(A, B, n, g)).constant_term
    reg = VarRegistry.of(x=n)
    res = co.zagier_residue(MSeries.univariate(reg, "x", A), MSeries.univariate(reg, "x", B), n, g)
    return lhs, res.constant_term


def verify_zagier(cases: int = 200, seed: int = DEFAULT_SEED) -> IdentityReport:
    """``int_{C_n} A(eta) exp(B(eta) theta)`` equals the residue form, on random ``A, B``."""
    rng = random.Random(seed)
    params = {"cases": cases, "seed": seed}
    for k in range(cases):
        A, B, n, g = random_zagier_case(rng)
        lhs, rhs = zagier_case(A, B, n, g)
        if lhs != rhs:
            return IdentityReport("zagier", False, {"case": k, "n": n, "g": g, "A": A, "B": B, "integral": lhs, "residue": rhs}, params, "", k + 1)
    return IdentityReport("zagier", True, None, params, "", cases)
