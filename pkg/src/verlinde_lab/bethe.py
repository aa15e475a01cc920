"""Bethe-ansatz evaluation of the stack-level indices and their series form.

The level-``k`` Bethe equation in the variable ``z`` is

    z^(2k) ((1 - v^2/z^2)/(1 - v^2 z^2))^2 ((1 + s/(vz))/(1 + sz/v)) ((1 + svz)/(1 + sv/z)) = 1

with ``t = v^2``.  Its roots are located on the cleared polynomial, polished
by Newton steps against the original rational equation, and then weighted by
``theta'^(1-g)``.  The same quantity at ``k = 2`` is also a finite sum of
residues at the zeros of the Bethe function, which :func:`stack_index_series`
evaluates exactly through the residue engine.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable

import gmpy2
import numpy as np
from gmpy2 import mpq

from . import expressions as ex
from .expressions import Factored, LogTerms, LPoly
from .residue import IndexSeries, SGradedSeries, _st_from_rt, _validate_g, index_pair, total_residue
from .series import MSeries, VarRegistry, rat
from .symmetry import IdentityReport

GROUPS = ("SU11", "SL2R", "U11")

RESIDUAL_TOL = 1e-10
POLISH_TOL = 1e-12
DEDUP_TOL = 1e-8
MULTIPLICITY_TOL = 1e-6
COLLISION_TOL = 1e-9
HESSIAN_TOL = 1e-12
BUDGET_TOL = 1e-8


class DegenerateParameters(ArithmeticError):
    """Root refinement stalled, roots nearly collided, or a Hessian vanished."""


# ---------------------------------------------------------------------------
# queries and root sets


@dataclass(frozen=True)
class BetheQuery:
    group: str
    g: int
    k: int = 2
    t: complex = 0.1
    s: complex = 0.0
    kprime: int = 1

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}, got {self.group!r}")
        _validate_g(self.g)
        if not isinstance(self.k, int) or self.k < 0:
            raise ValueError(f"level k must be a nonnegative integer, got {self.k!r}")
        if not isinstance(self.kprime, int) or self.kprime < 1:
            raise ValueError(f"abelian level k' must be a positive integer, got {self.kprime!r}")
        if not abs(complex(self.t)) < 1:
            raise ValueError(f"|t| must be < 1, got t={self.t}")
        if complex(self.t) == 0:
            raise ValueError("t = 0 makes the Bethe equation degenerate")
        if self.group != "SU11" and complex(self.s) != 0:
            raise ValueError(f"{self.group} is an s = 0 specialization")

    @property
    def v(self) -> complex:
        return cmath.sqrt(complex(self.t))


@dataclass
class BetheRoot:
    z: complex
    residual: float
    hessian: complex
    flags: tuple[str, ...] = ()


@dataclass
class BetheSolutionSet:
    query: BetheQuery
    roots: list[BetheRoot]
    degree: int
    removed_zero_order: int
    flags: dict = field(default_factory=dict)

    @property
    def values(self) -> list[complex]:
        return [r.z for r in self.roots]

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.roots), default=0.0)

    def to_json_obj(self, digits: int = 15) -> dict:
        return {
            "query": {"group": self.query.group, "g": self.query.g, "k": self.query.k, "t": _cstr(self.query.t, digits), "s": _cstr(self.query.s, digits)},
            "degree": self.degree,
            "removed_zero_order": self.removed_zero_order,
            "roots": [
                {"re": f"{r.z.real:.{digits}e}", "im": f"{r.z.imag:.{digits}e}", "residual": f"{r.residual:.3e}", "flags": list(r.flags)}
                for r in self.roots
            ],
            "flags": self.flags,
        }


def _cstr(x, digits: int) -> str:
    x = complex(x)
    return f"{x.real:.{digits}e}" if x.imag == 0 else f"{x.real:.{digits}e}{x.imag:+.{digits}e}j"


# ---------------------------------------------------------------------------
# the Bethe equation


def bethe_lhs(z: complex, k: int, s: complex, v: complex) -> complex:
    return (
        z ** (2 * k)
        * ((1 - v * v / (z * z)) / (1 - v * v * z * z)) ** 2
        * ((1 + s / (v * z)) / (1 + s * z / v))
        * ((1 + s * v * z) / (1 + s * v / z))
    )


def bethe_lhs_factored(k: int) -> Factored:
    """The left side as a product of atoms; at ``k = 2`` this is the Bethe function."""
    return Factored(
        1,
        (0, 0, 2 * k),
        {ex.A_V2_Z2: 2, ex.A_V2Z2: -2, ex.A_S_ZV: 1, ex.A_SZ_V: -1, ex.A_SVZ: 1, ex.A_SV_Z: -1},
    )


def _common_zeros(s: complex, v: complex) -> list[complex]:
    """Points where a numerator factor and a denominator factor vanish together.

    Clearing denominators creates spurious polynomial roots exactly there;
    generic parameters have none.
    """
    num = [v, -v, -s / v]
    den = [1 / v, -1 / v, -s * v]
    if s != 0:
        num.append(-1 / (s * v))
        den.append(-v / s)
    return [p for p in num if any(abs(p - d) <= COLLISION_TOL * max(abs(p), abs(d)) for d in den)]


def cleared_polynomial(k: int, s: complex, v: complex) -> tuple[np.ndarray, int]:
    """Coefficients (lowest degree first) of numerator minus denominator.

    The numerator is ``z^a (z^2-v^2)^2 (z+s/v)(1+svz)`` and the denominator
    ``z^b (1-v^2 z^2)^2 (1+sz/v)(z+sv)`` with ``a - b = 2k - 4``.  Exact zero
    coefficients at the bottom (the spurious ``z = 0`` factor) and the top are
    removed; the number of stripped low coefficients is returned as well.
    """
    P = np.polynomial.polynomial
    a, b = max(2 * k - 4, 0), max(4 - 2 * k, 0)
    num = P.polymul(P.polypow([-v * v, 0, 1], 2), P.polymul([s / v, 1], [1, s * v]))
    den = P.polymul(P.polypow([1, 0, -v * v], 2), P.polymul([1, s / v], [s * v, 1]))
    num = np.concatenate([np.zeros(a, dtype=complex), np.asarray(num, dtype=complex)])
    den = np.concatenate([np.zeros(b, dtype=complex), np.asarray(den, dtype=complex)])
    n = max(len(num), len(den))
    poly = np.pad(num, (0, n - len(num))) - np.pad(den, (0, n - len(den)))
    low = 0
    while low < len(poly) and poly[low] == 0:
        low += 1
    poly = poly[low:]
    while len(poly) and poly[-1] == 0:
        poly = poly[:-1]
    if len(poly) < 2:
        raise DegenerateParameters("the cleared Bethe polynomial is constant")
    return poly, low


def cleared_polynomial_exact(k: int) -> LPoly:
    """Numerator minus denominator as an exact Laurent polynomial in (s, v, z)."""
    num = LPoly({(0, 0, max(2 * k - 4, 0) + 5): 1}) * LPoly.from_atom(ex.A_V2_Z2) ** 2 * LPoly.from_atom(ex.A_S_ZV) * LPoly.from_atom(ex.A_SVZ)
    den = LPoly({(0, 0, max(4 - 2 * k, 0) + 1): 1}) * LPoly.from_atom(ex.A_V2Z2) ** 2 * LPoly.from_atom(ex.A_SZ_V) * LPoly.from_atom(ex.A_SV_Z)
    return num - den


def hessian_logterms(k: int) -> LogTerms:
    """The Hessian determinant as ``2k`` plus atom terms ``w u/(1+u)``."""
    return LogTerms(2 * k, {ex.A_V2Z2: -4, ex.A_V2_Z2: -4, ex.A_SZ_V: -1, ex.A_S_ZV: -1, ex.A_SVZ: 1, ex.A_SV_Z: 1})


def hessian(z: complex, k: int, s: complex, v: complex) -> complex:
    return (
        2 * k
        + 4 * v * v * z * z / (1 - v * v * z * z)
        + 4 * v * v / (z * z) / (1 - v * v / (z * z))
        - (s * z / v) / (1 + s * z / v)
        - (s / (v * z)) / (1 + s / (v * z))
        + (s * v * z) / (1 + s * v * z)
        + (s * v / z) / (1 + s * v / z)
    )


def theta_prime(z: complex, k: int, s: complex, v: complex) -> complex:
    num = (1 - v * v * z * z) * (1 - v * v / (z * z))
    den = (1 + s * z / v) * (1 + s / (v * z)) * (1 + s * v * z) * (1 + s * v / z)
    return num / den / hessian(z, k, s, v)


def _polish(z: complex, poly: np.ndarray, dpoly: np.ndarray, k: int, s: complex, v: complex) -> tuple[complex, float]:
    """Newton steps on the cleared polynomial; the smallest ``|P|`` seen wins."""
    P = np.polynomial.polynomial
    best, best_val = z, abs(P.polyval(z, poly))
    for _ in range(60):
        d = P.polyval(z, dpoly)
        if d == 0:
            break
        step = P.polyval(z, poly) / d
        if not cmath.isfinite(step) or abs(step) > 0.1 * max(1.0, abs(z)):
            break
        z = z - step
        val = abs(P.polyval(z, poly))
        if val < best_val:
            best, best_val = z, val
        if abs(step) <= 1e-17 * max(1.0, abs(z)):
            break
    best = complex(best)
    return best, float(abs(bethe_lhs(best, k, s, v) - 1))


def _polish_mp(z: complex, k: int, s: complex, t: complex, bits: int = 200) -> tuple[complex, float]:
    """Newton steps on ``A - B`` in extended precision; returns the root and ``|A/B - 1|``.

    ``A`` and ``B`` are the two sides of the cleared equation.  Near a zero of
    one of the factors the double-precision residual is dominated by
    cancellation, which the wider working precision removes.
    """
    a_pow, b_pow = max(2 * k - 4, 0), max(4 - 2 * k, 0)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        S, T = gmpy2.mpc(complex(s)), gmpy2.mpc(complex(t))
        V = gmpy2.sqrt(T)
        Z = gmpy2.mpc(z)

        def sides(Z):
            fa = [(Z * Z - T, 2, 2 * Z), (Z + S / V, 1, 1), (1 + S * V * Z, 1, S * V)]
            fb = [(1 - T * Z * Z, 2, -2 * T * Z), (1 + S * Z / V, 1, S / V), (Z + S * V, 1, 1)]
            A = Z ** a_pow
            B = Z ** b_pow
            dA = a_pow / Z
            dB = b_pow / Z
            for f, m, df in fa:
                A *= f ** m
                dA += m * df / f
            for f, m, df in fb:
                B *= f ** m
                dB += m * df / f
            return A, B, A * dA - B * dB

        for _ in range(8):
            A, B, dF = sides(Z)
            if dF == 0:
                break
            step = (A - B) / dF
            Z -= step
            if abs(step) <= abs(Z) * gmpy2.mpfr(2) ** (-bits + 8):
                break
        A, B, _ = sides(Z)
        res = float(abs(A / B - 1)) if B != 0 else math.inf
        return complex(Z), res


def solve_bethe(q: BetheQuery) -> BetheSolutionSet:
    """All regular solutions of the Bethe equation for ``q``."""
    s, v, k = complex(q.s), q.v, q.k
    poly, low = cleared_polynomial(k, s, v)
    P = np.polynomial.polynomial
    dpoly = P.polyder(poly)
    raw = np.roots(poly[::-1])
    kept: list[BetheRoot] = []
    flags = {"non_regular": [], "deduplicated": 0, "polish_above_1e-12": 0}
    singular = _common_zeros(s, v)
    for z0 in raw:
        z, res = _polish(complex(z0), poly, dpoly, k, s, v)
        if res > POLISH_TOL:
            z, res = _polish_mp(z, k, s, complex(q.t))
        scale = max(1.0, abs(z))
        if any(abs(z - p) <= math.sqrt(COLLISION_TOL) * max(abs(p), 1e-300) for p in singular):
            flags["non_regular"].append(z)
            continue
        if not math.isfinite(res) or res > RESIDUAL_TOL:
            raise DegenerateParameters(f"root refinement stalled at z={z} with residual {res:.3e}")
        near = [r for r in kept if abs(r.z - z) < MULTIPLICITY_TOL * scale]
        if any(abs(r.z - z) < DEDUP_TOL * scale for r in near):
            flags["deduplicated"] += 1
            continue
        if near:
            raise DegenerateParameters(f"roots {near[0].z} and {z} are closer than {MULTIPLICITY_TOL}; multiplicity suspected")
        hz = hessian(z, k, s, v)
        if abs(hz) < HESSIAN_TOL:
            raise DegenerateParameters(f"Hessian vanishes at z={z}")
        rflags = ("polish_above_1e-12",) if res > POLISH_TOL else ()
        if rflags:
            flags["polish_above_1e-12"] += 1
        kept.append(BetheRoot(z, res, hz, rflags))
    kept.sort(key=lambda r: (round(cmath.phase(r.z), 12), abs(r.z)))
    flags["non_regular"] = [complex(z) for z in flags["non_regular"]]
    return BetheSolutionSet(q, kept, len(poly) - 1, low, flags)


def weyl_closure_defect(sol: BetheSolutionSet) -> float:
    """Largest distance from ``1/z`` to the root set, over all roots ``z``."""
    roots = sol.values
    worst = 0.0
    for z in roots:
        w = 1 / z
        worst = max(worst, min(abs(w - y) / max(1.0, abs(w)) for y in roots))
    return worst


# ---------------------------------------------------------------------------
# Verlinde sums


def _theta_sum(sol: BetheSolutionSet) -> complex:
    q = sol.query
    s, v = complex(q.s), q.v
    return sum(theta_prime(r.z, q.k, s, v) ** (1 - q.g) for r in sol.roots)


def stack_index_su11(q: BetheQuery, prime: bool = False) -> complex:
    """``sum theta'^(1-g)`` over the Bethe roots; halved on the Weyl quotient."""
    if q.group != "SU11":
        raise ValueError("stack_index_su11 needs an SU11 query")
    total = _theta_sum(solve_bethe(q))
    return total / 2 if prime else total


def closed_form_full(g: int, t):
    """The ``s = 0``, ``k = 2`` full sum, exact when ``t`` is rational."""
    t = rat(t) if isinstance(t, (int, str, type(mpq()))) else t
    a = 4 * (1 + t) / (1 - t) ** 3
    b = 4 * (1 - t) / (1 + t) ** 3
    return 2 * a ** (g - 1) + 2 * b ** (g - 1)


def closed_form_series(g: int, order_t: int) -> IndexSeries:
    reg = VarRegistry.of(t=order_t)
    t = MSeries.var(reg, "t")
    a = 4 * (1 + t) * ((1 - t) ** 3).invert()
    b = 4 * (1 - t) * ((1 + t) ** 3).invert()
    total = 2 * a ** (g - 1) + 2 * b ** (g - 1)
    return IndexSeries({e[0]: c for e, c in total.terms().items()}, order_t, g, label="closed_form")


def quartic_factorization_holds() -> bool:
    """At ``s = 0``, ``k = 2`` the cleared polynomial is ``z (1+t)(z^2-1)(1-t)(z^2+1)``."""
    at_s0 = LPoly({e: c for e, c in cleared_polynomial_exact(2).t.items() if e[0] == 0})
    z = LPoly({(0, 0, 1): 1})
    one = LPoly.one()
    t = LPoly({(0, 2, 0): 1})
    expect = z * (one + t) * (z * z - one) * (one - t) * (z * z + one)
    return (at_s0 - expect).is_zero()


def _theta_sl2r_exact(w: mpq, t: mpq, k: int) -> mpq:
    """``theta_t`` at ``s = 0`` as a function of ``w = z^2``."""
    num = (1 - t * w) * (1 - t / w)
    hess = 2 * k + 4 * t * w / (1 - t * w) + 4 * t / w / (1 - t / w)
    return num / hess


def verlinde_real(q: BetheQuery) -> complex:
    """SL(2,R) sum over the ``s = 0`` Bethe roots; U(1,1) is ``k'^g`` times it."""
    if q.group not in ("SL2R", "U11"):
        raise ValueError("verlinde_real needs an SL2R or U11 query")
    sl = BetheQuery("SU11", q.g, q.k, q.t, 0)
    value = _theta_sum(solve_bethe(sl))
    return value * q.kprime ** q.g if q.group == "U11" else value


def u11_two_variable(q: BetheQuery) -> complex:
    """U(1,1) sum over pairs ``(z, z')`` with ``z'^(2k') = 1`` modulo ``(z, z') ~ (-z, -z')``.

    Each pair carries ``theta_U = theta_SL(z) / k'``.
    """
    if q.group != "U11":
        raise ValueError("u11_two_variable needs a U11 query")
    sl = solve_bethe(BetheQuery("SU11", q.g, q.k, q.t, 0))
    zs = sl.values
    kp = q.kprime
    zp = [cmath.exp(1j * math.pi * m / kp) for m in range(2 * kp)]
    seen: list[tuple[complex, complex]] = []
    total = 0j
    v = q.v
    for z in zs:
        for w in zp:
            if any(abs(-z - a) < DEDUP_TOL and abs(-w - b) < DEDUP_TOL for a, b in seen):
                continue
            seen.append((z, w))
            total += (theta_prime(z, q.k, 0, v) / kp) ** (1 - q.g)
    return total


def verlinde_real_exact(group: str, g: int, t, kprime: int = 1, two_variable: bool = False) -> mpq:
    """Exact ``k = 2`` values at rational ``t``, using the roots ``i^e`` of the quartic.

    With ``two_variable`` the U(1,1) sum runs over orbit representatives of
    ``(e, m) ~ (e+2, m+k')`` on ``Z/4 x Z/2k'``.
    """
    t = rat(t)
    roots = range(4)  # z = i^e, so z^2 = (-1)^e
    if group == "SL2R" or (group == "U11" and not two_variable):
        val = sum(_theta_sl2r_exact(mpq((-1) ** e), t, 2) ** (1 - g) for e in roots)
        return val * kprime ** g if group == "U11" else val
    if group != "U11":
        raise ValueError(f"unknown real group {group!r}")
    seen = set()
    val = mpq(0)
    for e in roots:
        for m in range(2 * kprime):
            if ((e + 2) % 4, (m + kprime) % (2 * kprime)) in seen:
                continue
            seen.add((e, m))
            val += (_theta_sl2r_exact(mpq((-1) ** e), t, 2) / kprime) ** (1 - g)
    return val


# ---------------------------------------------------------------------------
# the exact residue form at k = 2


def stack_index_series(g: int, order_t: int, order_s: int | None = None) -> SGradedSeries:
    """Exact ``s``-graded series of the quotient-stack index at level 2.

    Half the residue of ``(h/f)^(g-1) df/f`` plus the residues of
    ``(h/f)^(g-1) f^j df/f`` for ``j = 1..g-1``, all taken at every zero of
    ``f``.  The result is a polynomial in ``s`` of degree ``4g-4``.
    """
    _validate_g(g)
    if order_s is None:
        order_s = 4 * g - 4
    total: dict[tuple[int, int], mpq] = {}
    for i in range(g):
        weight = mpq(1, 2) if i == g - 1 else mpq(1)
        rt = total_residue(g, i, order_s, order_t + order_s)
        for (a, m), c in _st_from_rt(rt).items():
            if m <= order_t:
                total[(a, m)] = total.get((a, m), 0) + weight * c
    return SGradedSeries(total, order_s, order_t, g)


@dataclass
class SeriesValue:
    value: complex
    tail: float
    budget_ok: bool


def evaluate_sgraded(ser: SGradedSeries, t: complex, s: complex) -> SeriesValue:
    """Horner evaluation in ``t`` for each power of ``s``, with a truncation estimate.

    The estimate is the largest of the last two retained coefficients of each
    ``s``-component times ``|t|^order |s|^a``.
    """
    t, s = complex(t), complex(s)
    by_a: dict[int, dict[int, mpq]] = {}
    for (a, m), c in ser.coeffs.items():
        by_a.setdefault(a, {})[m] = c
    value, tail = 0j, 0.0
    T = ser.t_order
    for a, cs in by_a.items():
        lo = min(cs)
        acc = 0j
        for m in range(T, lo - 1, -1):
            acc = acc * t + complex(float(cs.get(m, 0)))
        value += acc * t ** lo * s ** a
        last = max(abs(float(cs.get(T, 0))), abs(float(cs.get(T - 1, 0))) / max(abs(t), 1e-300))
        tail += last * abs(t) ** T * abs(s) ** a
    return SeriesValue(value, tail, tail < BUDGET_TOL)


DEFAULT_GRID: tuple[tuple[float, float], ...] = tuple((t, s) for t in (0.05, 0.1, 0.2) for s in (0.02, 0.05, 0.1))


@dataclass
class StackComparison:
    g: int
    t: complex
    s: complex
    series_value: complex
    bethe_value: complex
    rel_err: float
    tail: float
    verdict: str

    def to_json_obj(self) -> dict:
        return {
            "g": self.g,
            "t": _cstr(self.t, 6),
            "s": _cstr(self.s, 6),
            "series": _cstr(self.series_value, 15),
            "bethe": _cstr(self.bethe_value, 15),
            "rel_err": f"{self.rel_err:.3e}",
            "tail": f"{self.tail:.3e}",
            "verdict": self.verdict,
        }


def compare_stack(g: int, grid: Iterable[tuple[complex, complex]] = DEFAULT_GRID, order_t: int = 30, tol: float = 1e-6, series: SGradedSeries | None = None) -> list[StackComparison]:
    """Series path against the Bethe path at each grid point.

    A point whose truncation tail exceeds the budget is ``inconclusive``.
    """
    ser = series if series is not None else stack_index_series(g, order_t)
    out = []
    for t, s in grid:
        sv = evaluate_sgraded(ser, t, s)
        bv = stack_index_su11(BetheQuery("SU11", g, 2, t, s), prime=True)
        rel = abs(sv.value - bv) / max(abs(bv), 1e-300)
        verdict = "inconclusive" if not sv.budget_ok else ("pass" if rel <= tol else "fail")
        out.append(StackComparison(g, complex(t), complex(s), sv.value, bv, rel, sv.tail, verdict))
    return out


def verify_mainc(g: int, j: int, order_t: int) -> IdentityReport:
    """Twice the stack index minus twice the compact indices is the ``j, g-1`` index.

    The intermediate identity (the left side equals the ``s^(2j)`` part of the
    residue of ``(h/f)^(g-1) df/f``) is checked along the way.
    """
    _validate_g(g)
    if not 0 <= j < g - 1:
        raise ValueError(f"j={j} outside 0 <= j < g-1 for g={g}")
    params = {"g": g, "j": j, "order_t": order_t}
    stack = stack_index_series(g, order_t).s_coefficient(2 * j)
    compact = [index_pair(g, i, j, order_t) for i in range(g - 1)]
    lhs = stack.shifted(0, 2)
    for ser in compact:
        lhs = lhs - ser.shifted(0, 2)
    middle = index_pair(g, g - 1, j, order_t, formal=True)
    rhs = index_pair(g, j, g - 1, order_t)
    k_mid = lhs.first_difference(middle)
    if k_mid is not None:
        return IdentityReport("mainc", False, {"check": "intermediate", "t_power": k_mid}, params, "", 1)
    k = lhs.first_difference(rhs)
    if k is not None:
        return IdentityReport("mainc", False, {"check": "identity", "t_power": k}, params, "", 2)
    return IdentityReport("mainc", True, None, params, "", 2, {"lhs": lhs, "rhs": rhs})
