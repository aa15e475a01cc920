"""The ten acceptance criteria, each at its stated tolerance.

A one-line verdict per criterion is printed in the terminal summary.
"""

from functools import lru_cache

from conftest import record
from verlinde_lab import bethe as bt
from verlinde_lab import symmetry as sy
from verlinde_lab.cli import verify_closed_form, verify_real_ratio, verify_stack_grid
from verlinde_lab.residue import index_pair


@lru_cache(maxsize=None)
def matrix(g: int, order: int):
    return sy.symmetry_matrix(g, order)


def test_criterion_01_symmetry():
    reps = [sy.verify_symmetry_table(g, 12, matrix(g, 12)) for g in (2, 3, 4)]
    integer = all(s.is_integral() for g in (2, 3, 4) for s in matrix(g, 12).values())
    ok = all(r.passed for r in reps) and integer
    bad = [r.witness for r in reps if not r.passed]
    record(1, "index_pair(g,i,j) = index_pair(g,j,i), g in {2,3,4}, t^12", ok, str(bad) if bad else "")
    assert ok, bad


def test_criterion_02_oracle():
    reps = [sy.verify_oracle(g, 8) for g in (2, 3)]
    ok = all(r.passed for r in reps)
    record(2, "residue engine = direct integration, g in {2,3}, j <= 2g-2, t^8", ok, "" if ok else str([r.witness for r in reps]))
    assert ok


def test_criterion_03_zagier():
    rep = sy.verify_zagier(200, sy.DEFAULT_SEED)
    record(3, "Zagier residue formula on 200 seeded cases (n <= 6, g <= 5)", rep.passed, "" if rep.passed else str(rep.witness))
    assert rep.passed and rep.checked == 200


def test_criterion_04_vanishing():
    reps = [sy.verify_vanishing(g, 8) for g in (2, 3, 4)]
    ok = all(r.passed for r in reps)
    record(4, "formal index vanishes for i in {-2,-1}, j in {-2,-1,2g-1,2g}", ok, "" if ok else str([r.witness for r in reps]))
    assert ok


def test_criterion_05_functional_equation():
    fe = sy.verify_functional_equation(20, sy.DEFAULT_SEED)
    inv = sy.verify_inversion()
    ok = fe.passed and fe.checked >= 20 and inv.passed
    record(5, "functional equation at seeded rational points and inversion identities", ok, "" if ok else str(fe.witness or inv.witness))
    assert ok


def test_criterion_06_integrality():
    series = [s for g in (2, 3, 4) for s in matrix(g, 12).values()]
    series += [index_pair(g, i, j, 8) for g in (2, 3) for i in range(g - 1) for j in range(2 * g - 1)]
    denominators = all(s.is_integral() for s in series)
    negative = sorted({(s.g, s.i, s.j, s.valuation) for s in series if not s.is_power_series()})
    ok = denominators and not negative
    detail = f"denominators ok: {denominators}; entries with negative t-powers (g,i,j,valuation): {negative}"
    record(6, "every production IndexSeries lies in Z[[t]]", ok, "" if ok else detail)
    assert ok, detail


def test_criterion_07_bethe_closed_form():
    reps = [verify_closed_form(g, (0.05, 0.1, 0.2)) for g in (2, 3)]
    ok = all(r.passed for r in reps)
    record(7, "s=0 roots {+-1,+-i} and closed-form stack sum, rel 1e-10", ok, "" if ok else str([r.witness for r in reps]))
    assert ok


def test_criterion_08_reconciliation():
    reps = [verify_stack_grid(g, bt.DEFAULT_GRID, 30, 1e-6) for g in (2, 3)]
    ok = all(r.passed for r in reps) and all(r.checked == 9 for r in reps)
    worst = max(float(p["rel_err"]) for r in reps for p in r.extra["points"])
    record(8, "series vs Bethe sum on the 9-point grid, t^30, rel 1e-6", ok, f"worst rel err {worst:.1e}" if ok else str([r.witness for r in reps]))
    assert ok


def test_criterion_09_mainc():
    reps = [bt.verify_mainc(g, j, 12) for g in (2, 3) for j in range(g - 1)]
    ok = all(r.passed for r in reps)
    record(9, "2 stack' - 2 sum = chi(L_j (x) Lambda_{g-1}), g in {2,3}, t^12", ok, "" if ok else str([r.witness for r in reps]))
    assert ok


def test_criterion_10_duality():
    lid = [sy.verify_lidual(g, i) for g in (2, 3) for i in range(g - 1)]
    euler = [sy.verify_duality(g, i, j, 8) for g in (2, 3) for i in range(g - 1) for j in range(g - 1)]
    ratio = [verify_real_ratio(g, kp) for g in (2, 3) for kp in (1, 2, 3)]
    parts = {
        "lidual": all(r.passed for r in lid),
        "euler_forms": all(r.passed for r in euler),
        "u11_ratio": all(r.passed for r in ratio),
    }
    ok = all(parts.values())
    detail = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in parts.items())
    if not parts["lidual"]:
        detail += "; " + "; ".join(f"g={r.params['g']} i={r.params['i']}: {r.detail}" for r in lid if not r.passed)
    record(10, "duality: lidual, Euler-form relations at t^8, U(1,1)/SL(2,R) = k'^g", ok, detail)
    assert ok, detail
