"""Equivariant indices as residues of the Bethe-function integrand.

Local coordinates
-----------------
Near every zero of ``f`` we write ``z = eps * r**alpha * v**beta * exp(x/2)``
and use the grading variables ``r = s/t`` and ``t = v**2``.  With ``beta`` odd
every atom ``1 + c s^a v^b z^k`` becomes ``1 + C r^p t^q exp(k x/2)`` with
integer ``p``, ``q`` (the atoms always have ``b + k`` even), and a monomial
``s^a t^m`` corresponds to ``r^a t^(m+a)``.

Four charts cover the zeros of ``f``: ``z = +v`` and ``z = -v`` (double
zeros, present for all parameters), ``z = -s/v`` and ``z = -1/(sv)`` (simple
zeros that only carry residues when the exponent of ``f`` is large).

Normalization
-------------
Since ``dz/z = dx/2`` in every chart, the contour integral
``(1/2 pi i) oint F dz/z`` around a chart centre equals ``Res_x F / 2``.
The ``z = -v`` chart is the image of ``z = +v`` under ``s -> -s`` (here
``r -> -r``), so the two-point sum equals the even part of the ``+v``
residue.  Both constants are checked against the characteristic-class
route in the test suite.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from . import expressions as ex
from .expressions import Atom, Factored, LogTerms
from .series import (
    IdenticallyZeroWithinTruncation,
    LaurentX,
    MSeries,
    SeriesError,
    VarRegistry,
    rat,
    rat_str,
)

log = logging.getLogger(__name__)

NAMES = ("x", "r", "t")


class UnsupportedComponent(ValueError):
    pass


class ChartError(SeriesError):
    """An atom has no convergent expansion in the requested chart."""


@dataclass(frozen=True)
class Chart:
    name: str
    eps: int
    alpha: int
    beta: int

    def local(self, a: int, b: int, k: int) -> tuple[int, int, int]:
        """Sign and (r, t) exponents of ``s^a v^b z^k`` in this chart."""
        v_exp = 2 * a + b + self.beta * k
        if v_exp % 2:
            raise ChartError(f"odd power of v for s^{a} v^{b} z^{k}")
        sign = self.eps ** (k % 2)
        return sign, a + self.alpha * k, v_exp // 2


PLUS_V = Chart("+v", 1, 0, 1)
MINUS_V = Chart("-v", -1, 0, 1)
ZERO_S = Chart("-s/v", -1, 1, 1)
ZERO_INV = Chart("-1/(sv)", -1, -1, -3)
CHARTS = {c.name: c for c in (PLUS_V, MINUS_V, ZERO_S, ZERO_INV)}


# ---------------------------------------------------------------------------
# local expansion of factors


@dataclass(frozen=True)
class _Local:
    """``1 + C r^p t^q exp(k x/2)``."""

    C: mpq
    p: int
    q: int
    k: int

    @property
    def kind(self) -> str:
        if self.p == 0 and self.q == 0:
            if self.C == -1:
                if self.k == 0:
                    raise IdenticallyZeroWithinTruncation("atom vanishes identically in this chart")
                return "zero"
            return "const"
        if self.p >= 0 and self.q >= 0:
            return "unit"
        if self.p <= 0 and self.q <= 0:
            return "large"
        raise ChartError(f"atom with mixed-sign exponents r^{self.p} t^{self.q} has no local expansion")


def _local_atom(at: Atom, chart: Chart) -> _Local:
    sign, p, q = chart.local(at.a, at.b, at.k)
    return _Local(at.c * sign, p, q, at.k)


def _shift_of_power(loc: _Local, m: int) -> tuple[int, int, int]:
    kind = loc.kind
    if kind == "zero":
        return (m, 0, 0)
    if kind == "large":
        return (0, m * loc.p, m * loc.q)
    return (0, 0, 0)


def _exp_monomial(reg: VarRegistry, C, p: int, q: int, kx) -> MSeries:
    """``C r^p t^q exp(kx * x)``, truncated (p, q >= 0)."""
    if p > reg.orders[1] or q > reg.orders[2]:
        return MSeries.zero(reg)
    return MSeries.exp_linear(reg, "x", kx).shift((0, p, q)).scale(C)


def _expm1_over_x(reg: VarRegistry, a) -> MSeries:
    """``(exp(a x) - 1)/x``."""
    a = rat(a)
    n = reg.orders[0]
    coeffs, c = [], a
    for e in range(n + 1):
        coeffs.append(c)
        c = c * a / (e + 2)
    return MSeries.univariate(reg, "x", coeffs)


def _unit_power(reg: VarRegistry, C, p: int, q: int, k: int, m: int) -> MSeries:
    """``(1 + C r^p t^q e^{kx/2})**m`` for (p, q) >= 0 not both zero, by the binomial series."""
    rmax, tmax = reg.orders[1], reg.orders[2]
    terms = MSeries.zero(reg)
    n = 0
    C = rat(C)
    while n * p <= rmax and n * q <= tmax:
        b = _binom(m, n)
        if b:
            terms = terms + _exp_monomial(reg, b * C ** n, n * p, n * q, mpq(n * k, 2))
        n += 1
        if m >= 0 and n > m:
            break
    return terms


def _binom(m: int, n: int) -> int:
    if m >= 0:
        return comb(m, n) if n <= m else 0
    return (-1) ** n * comb(-m + n - 1, n)


def factor_body(loc: _Local, m: int, reg: VarRegistry) -> MSeries:
    """Body of ``(1 + C r^p t^q e^{kx/2})**m`` after its structural shift is removed."""
    kind = loc.kind
    if kind == "unit":
        return _unit_power(reg, loc.C, loc.p, loc.q, loc.k, m)
    if kind == "const":
        base = MSeries.exp_linear(reg, "x", mpq(loc.k, 2)).scale(loc.C) + 1
        return base.power(m)
    if kind == "zero":
        # 1 - e^{kx/2} = x * (-(e^{kx/2} - 1)/x)
        return (-_expm1_over_x(reg, mpq(loc.k, 2))).power(m)
    # large: (C M E)^m (1 + C^-1 M^-1 E^-1)^m
    head = MSeries.exp_linear(reg, "x", mpq(m * loc.k, 2)).scale(loc.C ** m)
    return head * _unit_power(reg, 1 / loc.C, -loc.p, -loc.q, -loc.k, m)


def _term_shift(loc: _Local) -> int:
    return -1 if loc.kind == "zero" else 0


def term_body(loc: _Local, reg: VarRegistry, x_shift: int) -> MSeries:
    """Body of ``u/(1+u)`` measured against ``x**x_shift`` (x_shift is 0 or -1)."""
    kind = loc.kind
    if kind == "zero":
        # u/(1+u) = 1/(1 - e^{-kx/2}) = x^{-1} * x/(1 - e^{-kx/2})
        return (-_expm1_over_x(reg, mpq(-loc.k, 2))).invert()
    if kind == "unit":
        u = _exp_monomial(reg, loc.C, loc.p, loc.q, mpq(loc.k, 2))
        val = u * _unit_power(reg, loc.C, loc.p, loc.q, loc.k, -1)
    elif kind == "const":
        u = MSeries.exp_linear(reg, "x", mpq(loc.k, 2)).scale(loc.C)
        val = u * (u + 1).invert()
    else:
        val = _unit_power(reg, 1 / loc.C, -loc.p, -loc.q, -loc.k, -1)
    return val.shift((1, 0, 0)) if x_shift == -1 else val


# ---------------------------------------------------------------------------
# structural valuations and localization


def factored_shift(expr: Factored, chart: Chart) -> tuple[int, int, int]:
    sign, p, q = chart.local(*expr.mono)
    shift = [0, p, q]
    for at, m in expr.atoms.items():
        for k, d in enumerate(_shift_of_power(_local_atom(at, chart), m)):
            shift[k] += d
    return tuple(shift)


def logterms_shift(expr: LogTerms, chart: Chart) -> tuple[int, int, int]:
    low = 0
    for at in expr.terms:
        low = min(low, _term_shift(_local_atom(at, chart)))
    return (low, 0, 0)


def localize_factored(expr: Factored, chart: Chart, reg: VarRegistry) -> LaurentX:
    """Local expansion with the body truncated to ``reg`` orders."""
    sign, p, q = chart.local(*expr.mono)
    mono_k = expr.mono[2]
    body = MSeries.exp_linear(reg, "x", mpq(mono_k, 2)).scale(expr.const * sign)
    univariate, sparse = [], []
    for at, m in sorted(expr.atoms.items()):
        loc = _local_atom(at, chart)
        fb = factor_body(loc, m, reg)
        (univariate if loc.kind in ("const", "zero") else sparse).append(fb)
    for fb in univariate:
        body = body * fb
    for fb in sorted(sparse, key=len):
        body = body * fb
    return LaurentX(body, factored_shift(expr, chart), "x")


def localize_logterms(expr: LogTerms, chart: Chart, reg: VarRegistry) -> LaurentX:
    shift = logterms_shift(expr, chart)
    body = MSeries.const(reg, expr.const).shift((-shift[0], 0, 0))
    for at, w in expr.terms.items():
        body = body + term_body(_local_atom(at, chart), reg, shift[0]).scale(w)
    return LaurentX(body, shift, "x")


def localize(expr, chart: Chart | str, orders: Sequence[int]) -> LaurentX:
    """Expand a factored expression or a log-derivative sum at a chart centre.

    ``orders`` are the body truncation orders for (x, r, t).
    """
    if isinstance(chart, str):
        chart = CHARTS[chart]
    reg = VarRegistry(NAMES, tuple(orders))
    if isinstance(expr, Factored):
        return localize_factored(expr, chart, reg)
    if isinstance(expr, LogTerms):
        return localize_logterms(expr, chart, reg)
    raise TypeError(f"cannot localize {type(expr).__name__}")


def chart_residue(
    pre: Factored, bracket: LogTerms, power: int, chart: Chart, r_max: int, t_max: int
) -> dict[tuple[int, int], mpq]:
    """``Res_x pre * bracket**power`` in a chart, as exact (r, t) coefficients.

    Only coefficients with ``r <= r_max`` and ``t <= t_max`` are returned; all
    of those are exact.  The body truncation is derived from the structural
    shifts, so no precision is wasted and none is missing.
    """
    s_pre = factored_shift(pre, chart)
    s_br = logterms_shift(bracket, chart)
    S = tuple(a + power * b for a, b in zip(s_pre, s_br))
    ox, orr, ot = -1 - S[0], r_max - S[1], t_max - S[2]
    if ox < 0 or orr < 0 or ot < 0:
        return {}
    reg = VarRegistry(NAMES, (ox, orr, ot))
    body = localize_factored(pre, chart, reg).body
    if power:
        body = body * localize_logterms(bracket, chart, reg).body.power(power)
    res = body.coefficient("x", ox)
    out = {}
    for (p, q), c in res.terms().items():
        out[(p + S[1], q + S[2])] = c
    return out


# ---------------------------------------------------------------------------
# index series


@dataclass
class IndexSeries:
    """A Laurent series in ``t`` with exact coefficients, valid through ``order``."""

    coeffs: dict[int, mpq]
    order: int
    g: int | None = None
    i: int | None = None
    j: int | None = None
    label: str = ""

    def __post_init__(self):
        self.coeffs = {int(k): rat(c) for k, c in self.coeffs.items() if c and k <= self.order}

    def __getitem__(self, k: int) -> mpq:
        if k > self.order:
            raise IndexError(f"t^{k} beyond order {self.order}")
        return self.coeffs.get(k, mpq(0))

    @property
    def valuation(self) -> int | None:
        return min(self.coeffs) if self.coeffs else None

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs.values())

    def is_power_series(self) -> bool:
        return all(k >= 0 for k in self.coeffs)

    def shifted(self, k: int, scale=1) -> "IndexSeries":
        """``scale * t**k * self``."""
        scale = rat(scale)
        return IndexSeries({e + k: c * scale for e, c in self.coeffs.items()}, self.order + k, self.g, self.i, self.j, self.label)

    def truncated(self, order: int) -> "IndexSeries":
        return IndexSeries(dict(self.coeffs), min(order, self.order), self.g, self.i, self.j, self.label)

    def __add__(self, other: "IndexSeries") -> "IndexSeries":
        order = min(self.order, other.order)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return IndexSeries(out, order, self.g, label=self.label)

    def __sub__(self, other: "IndexSeries") -> "IndexSeries":
        return self + other.shifted(0, -1)

    def same_as(self, other: "IndexSeries") -> bool:
        """Coefficient equality through the smaller of the two orders."""
        n = min(self.order, other.order)
        keys = {k for k in set(self.coeffs) | set(other.coeffs) if k <= n}
        return all(self.coeffs.get(k, 0) == other.coeffs.get(k, 0) for k in keys)

    def first_difference(self, other: "IndexSeries") -> int | None:
        n = min(self.order, other.order)
        keys = sorted(k for k in set(self.coeffs) | set(other.coeffs) if k <= n)
        for k in keys:
            if self.coeffs.get(k, 0) != other.coeffs.get(k, 0):
                return k
        return None

    def evaluate(self, t: complex) -> complex:
        return sum(complex(float(c)) * t ** k for k, c in self.coeffs.items())

    def to_json_obj(self) -> dict:
        return {
            "g": self.g,
            "i": self.i,
            "j": self.j,
            "order": self.order,
            "label": self.label,
            "coefficients": {str(k): rat_str(c) for k, c in sorted(self.coeffs.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "IndexSeries":
        return cls({int(k): rat(c) for k, c in obj["coefficients"].items()}, obj["order"], obj.get("g"), obj.get("i"), obj.get("j"), obj.get("label", ""))

    def __str__(self) -> str:
        if not self.coeffs:
            return f"O(t^{self.order + 1})"
        parts = []
        for k, c in sorted(self.coeffs.items()):
            parts.append(f"{c}" if k == 0 else f"{c}*t^{k}")
        return " + ".join(parts) + f" + O(t^{self.order + 1})"


@dataclass
class SGradedSeries:
    """Exact coefficients of ``s^a t^m`` for ``a <= s_order`` and ``m <= t_order``."""

    coeffs: dict[tuple[int, int], mpq]
    s_order: int
    t_order: int
    g: int | None = None
    i: int | None = None

    def __post_init__(self):
        self.coeffs = {
            k: rat(c) for k, c in self.coeffs.items() if c and k[0] <= self.s_order and k[1] <= self.t_order
        }

    def s_coefficient(self, a: int) -> IndexSeries:
        if a > self.s_order:
            raise IndexError(f"s^{a} beyond order {self.s_order}")
        return IndexSeries({m: c for (b, m), c in self.coeffs.items() if b == a}, self.t_order, self.g, self.i)

    def lambda_component(self, j: int) -> IndexSeries:
        out = self.s_coefficient(2 * j)
        out.j = j
        return out

    def odd_part_vanishes(self) -> bool:
        return all(a % 2 == 0 for a, _ in self.coeffs)

    def max_s_degree(self) -> int:
        return max((a for a, _ in self.coeffs), default=0)

    def to_json_obj(self) -> dict:
        return {
            "g": self.g,
            "i": self.i,
            "s_order": self.s_order,
            "t_order": self.t_order,
            "coefficients": {f"{a},{m}": rat_str(c) for (a, m), c in sorted(self.coeffs.items())},
        }


def _validate_g(g):
    if not isinstance(g, int) or isinstance(g, bool) or g < 2:
        raise ValueError(f"genus must be an integer > 1, got {g!r}")


def _st_from_rt(rt: Mapping[tuple[int, int], mpq]) -> dict[tuple[int, int], mpq]:
    return {(p, q - p): c for (p, q), c in rt.items()}


def total_residue(g: int, i: int, r_max: int, t_max: int, charts: Iterable[str] | None = None, direct_minus: bool = False) -> dict[tuple[int, int], mpq]:
    """Sum over the zeros of ``f`` of ``(1/2 pi i) oint h^(g-1) f^(-i) df/f`` in (r, t) coordinates.

    The default chart list covers every zero of ``f``; for ``0 <= i < g-1``
    only ``z = +-v`` contribute.  With ``direct_minus`` the ``z = -v`` chart is
    expanded directly instead of via ``r -> -r``.
    """
    pre, bracket, power = ex.main_integrand(g, i)
    names = list(charts) if charts is not None else ["+v", "-v", "-s/v", "-1/(sv)"]
    total: dict[tuple[int, int], mpq] = {}
    plus = None
    for name in names:
        if name == "-v" and not direct_minus:
            if plus is None:
                plus = chart_residue(pre, bracket, power, PLUS_V, r_max, t_max)
            part = {(p, q): c * (-1) ** p for (p, q), c in plus.items()}
        else:
            part = chart_residue(pre, bracket, power, CHARTS[name], r_max, t_max)
            if name == "+v":
                plus = part
        for k, c in part.items():
            total[k] = total.get(k, 0) + c / 2
    return {k: c for k, c in total.items() if c}


def index_pair(g: int, i: int, j: int, order_t: int, formal: bool = False, direct_minus: bool = False) -> IndexSeries:
    """``chi_T(M(GL2); L_i (x) Lambda_j)`` through ``t**order_t``.

    Outside ``0 <= i < g-1`` a :class:`UnsupportedComponent` is raised unless
    ``formal`` is set, in which case the same residue sum over all zeros of
    ``f`` is evaluated (this is what the vanishing and reflection identities
    are about).
    """
    _validate_g(g)
    if not formal and not 0 <= i < g - 1:
        raise UnsupportedComponent(f"i={i} is not a geometric component for g={g}; use formal=True")
    if order_t < 0:
        raise ValueError("order_t must be nonnegative")
    # negative j is evaluated like any other: chart bodies only carry
    # negative powers of r where the chart itself forces them
    a = 2 * j
    rt = total_residue(g, i, a, order_t + a, direct_minus=direct_minus)
    coeffs = {m: c for (b, m), c in _st_from_rt(rt).items() if b == a}
    return IndexSeries(coeffs, order_t, g, i, j, "index_pair")


def index_lambda_s(g: int, i: int, order_t: int, order_s: int | None = None, formal: bool = False) -> SGradedSeries:
    """All ``s``-graded pieces of the index in one residue computation."""
    _validate_g(g)
    if not formal and not 0 <= i < g - 1:
        raise UnsupportedComponent(f"i={i} is not a geometric component for g={g}")
    if order_s is None:
        order_s = 2 * (2 * g - 2) + 2
    rt = total_residue(g, i, order_s, order_t + order_s)
    return SGradedSeries(_st_from_rt(rt), order_s, order_t, g, i)


# ---------------------------------------------------------------------------
# the two displayed forms of the integrand agree


@dataclass
class ConsistencyReport:
    g: int
    i: int
    order: int
    passed: bool
    first_difference: tuple[int, ...] | None
    index_main: IndexSeries | None = None
    index_compact: IndexSeries | None = None
    detail: str = ""

    def to_json_obj(self) -> dict:
        return {
            "g": self.g,
            "i": self.i,
            "order": self.order,
            "passed": self.passed,
            "first_difference": list(self.first_difference) if self.first_difference else None,
            "detail": self.detail,
        }


def compact_integrand(g: int, i: int, chart: Chart, orders: Sequence[int]) -> LaurentX:
    """``h^(g-1) f^(-i) z f'/f`` assembled from separately localized pieces.

    Here ``z f'/f`` is produced as twice the x-log-derivative of the local
    expansion of ``f`` and ``h = (z f'/f) * f * P/Q``, independently of the
    atom bookkeeping used by the production path.
    """
    f = localize(ex.bethe_f(), chart, orders)
    ld = f.log_derivative() * 2
    P = localize(ex.p_factor(), chart, orders)
    Q = localize(ex.q_factor(), chart, orders)
    h = ld * f * P / Q
    return (h ** (g - 1)) * (f ** (-i)) * ld


def main_localized(g: int, i: int, chart: Chart, orders: Sequence[int]) -> LaurentX:
    pre, bracket, power = ex.main_integrand(g, i)
    return localize(pre, chart, orders) * (localize(bracket, chart, orders) ** power)


def consistency_main_vs_compact(g: int, i: int, order: int, chart: str = "+v") -> ConsistencyReport:
    """Compare the verbatim integrand with ``h^(g-1) f^(-i) logderiv`` as exact local series."""
    _validate_g(g)
    ch = CHARTS[chart]
    r_max = 2 * (2 * g - 2)
    pole = 2 * i + 1
    orders = (max(pole + 2 * g + 3, 2), r_max, order + r_max)
    A = main_localized(g, i, ch, orders)
    B = compact_integrand(g, i, ch, orders)
    diff = A.first_difference(B)
    detail = ""
    prec = (A - B).body.reg.orders
    shift = (A - B).shift
    reach = tuple(n + s for n, s in zip(prec, shift))
    if reach[0] < -1:
        detail = f"comparison only reaches x^{reach[0]}"
    passed = diff is None and reach[0] >= -1
    main_idx = index_lambda_s(g, i, order) if passed else None
    # the compact residues, extracted from B directly
    res = B.residue()
    rt = {k: c for k, c in res.terms().items()}
    st = _st_from_rt({(p, q): c for (p, q), c in rt.items()})
    even = {}
    for (a, m), c in st.items():
        if a % 2 == 0 and m <= order:
            even[(a, m)] = c
    compact_idx = SGradedSeries(even, r_max, order, g, i)
    report = ConsistencyReport(g, i, order, passed, diff, detail=detail)
    if main_idx is not None:
        agree = all(
            main_idx.lambda_component(j).same_as(compact_idx.lambda_component(j)) for j in range(2 * g - 1)
        )
        report.passed = agree
        report.index_main = main_idx.lambda_component(0)
        report.index_compact = compact_idx.lambda_component(0)
        if not agree:
            report.detail = "residues differ"
    return report
