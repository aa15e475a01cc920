"""Characteristic-class route to the indices.

Classes on the symmetric product ``C_n`` of a genus ``g`` curve are
polynomials in ``eta`` (degree <= n) and ``theta`` (degree <= g) whose
coefficients are power series in the grading variables.  They are stored as
an :class:`MSeries` whose registry starts with ``eta`` and ``theta``, so the
truncation ``eta**(n+1) = theta**(g+1) = 0`` is automatic.  ``zeta`` is
always ``exp(eta)``.

Integration uses ``int_{C_n} eta**a theta**b = g!/(g-b)!`` when
``a + b = n`` and zero otherwise.  The index of ``L_i (x) Lambda_{s^2}`` is
``2**(2g)`` times the integral over ``C_{2i}`` of the product of the Chern
characters and the Todd class.

Grading variables are ``r = s/t`` and ``t`` as in :mod:`verlinde_lab.residue`;
``s'`` = ``s * zeta**(-1/2)`` becomes ``r t exp(-eta/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Mapping, Sequence

from gmpy2 import mpq

from .residue import IndexSeries, SGradedSeries, UnsupportedComponent
from .series import LaurentX, MSeries, VarRegistry, rat, unit_times_power


class CohomClass:
    """A truncated class in ``H^*(C_n)`` with series coefficients."""

    __slots__ = ("m", "n", "g")

    def __init__(self, m: MSeries, n: int, g: int):
        names = m.reg.names
        if names[:2] != ("eta", "theta"):
            raise ValueError("registry must start with eta, theta")
        if m.reg.orders[0] < n or m.reg.orders[1] < min(g, n):
            raise ValueError("registry truncation is coarser than the ambient degrees")
        self.m = m
        self.n = n
        self.g = g

    @classmethod
    def registry(cls, n: int, g: int, **coeff_orders: int) -> VarRegistry:
        return VarRegistry(("eta", "theta") + tuple(coeff_orders), (n, min(g, n)) + tuple(coeff_orders.values()))

    @property
    def reg(self) -> VarRegistry:
        return self.m.reg

    def _wrap(self, m: MSeries) -> "CohomClass":
        return CohomClass(m, self.n, self.g)

    def __add__(self, other) -> "CohomClass":
        return self._wrap(self.m + (other.m if isinstance(other, CohomClass) else other))

    __radd__ = __add__

    def __sub__(self, other) -> "CohomClass":
        return self._wrap(self.m - (other.m if isinstance(other, CohomClass) else other))

    def __rsub__(self, other) -> "CohomClass":
        return self._wrap(other - self.m)

    def __neg__(self) -> "CohomClass":
        return self._wrap(-self.m)

    def __mul__(self, other) -> "CohomClass":
        return self._wrap(self.m * (other.m if isinstance(other, CohomClass) else other))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "CohomClass":
        return self._wrap(self.m ** k)

    def __eq__(self, other) -> bool:
        return isinstance(other, CohomClass) and self.m == other.m

    __hash__ = None

    def exp(self) -> "CohomClass":
        return self._wrap(self.m.exp())

    def degree_part(self, a: int, b: int) -> MSeries:
        """Coefficient of ``eta**a theta**b``."""
        return self.m.coefficient("eta", a).coefficient("theta", b)

    def star(self, degree_two: Sequence[str] = ("eta", "theta", "u")) -> "CohomClass":
        """``sum (-1)**k a_{2k}``: flip the sign of every degree-two generator present."""
        m = self.m
        for name in degree_two:
            if name in m.reg.names:
                m = m.scale_var(name, -1)
        return self._wrap(m)


def integrate_Cn(c: CohomClass, n: int | None = None, g: int | None = None) -> MSeries:
    """``int_{C_n} c`` as a series in the remaining variables."""
    n = c.n if n is None else n
    g = c.g if g is None else g
    rest = c.reg.drop("eta").drop("theta")
    total = MSeries.zero(rest)
    for b in range(0, min(g, n) + 1):
        a = n - b
        if a > c.reg.orders[0] or b > c.reg.orders[1]:
            continue
        weight = factorial(g) // factorial(g - b)
        total = total + c.degree_part(a, b).scale(weight)
    return total


def zagier_residue(A: MSeries, B: MSeries, n: int, g: int, var: str = "x") -> MSeries:
    """``Res_x A(x) (1 + x B(x))**g / x**(n+1)``: the ``x**n`` coefficient.

    ``A`` and ``B`` are series in ``var`` (plus possibly coefficient
    variables) truncated at ``var``-order at least ``n``.
    """
    if A.reg != B.reg:
        raise ValueError("A and B must share a registry")
    if A.reg.order(var) < n:
        from .series import InsufficientTruncation

        raise InsufficientTruncation(f"{var}-order {A.reg.order(var)} < n = {n}")
    x = MSeries.var(A.reg, var)
    integrand = A * ((1 + x * B) ** g)
    return integrand.coefficient(var, n)


def zagier_as_class(A: Sequence, B: Sequence, n: int, g: int) -> CohomClass:
    """``A(eta) * exp(B(eta) * theta)`` for coefficient lists ``A``, ``B``."""
    reg = CohomClass.registry(n, g)
    eta_a = MSeries.univariate(reg, "eta", list(A))
    eta_b = MSeries.univariate(reg, "eta", list(B))
    theta = MSeries.var(reg, "theta")
    return CohomClass(eta_a * (eta_b * theta).exp(), n, g)


# ---------------------------------------------------------------------------
# Chern data of the fixed-point components


@dataclass(frozen=True)
class IndexQuery:
    g: int
    i: int
    j: int | None = None
    order_t: int = 8
    order_s: int | None = None

    def __post_init__(self):
        if not isinstance(self.g, int) or self.g < 2:
            raise ValueError(f"genus must be an integer > 1, got {self.g!r}")
        if not isinstance(self.i, int) or not 0 <= self.i:
            raise ValueError(f"component label must be a nonnegative integer, got {self.i!r}")
        if self.order_t < 0:
            raise ValueError("order_t must be nonnegative")

    @property
    def ibar(self) -> int:
        return self.g - 1 - self.i

    @property
    def n(self) -> int:
        return 2 * self.i

    @property
    def s_degree(self) -> int:
        if self.order_s is not None:
            return self.order_s
        if self.j is not None:
            return 2 * self.j
        return 2 * (2 * self.g - 2)


def _exp_eta(reg: VarRegistry, a) -> MSeries:
    return MSeries.exp_linear(reg, "eta", a)


def _eta_over_expm1_inverse_unit(reg: VarRegistry) -> MSeries:
    """``(1 - exp(-eta))/eta``, a unit."""
    n = reg.order("eta")
    coeffs = [mpq((-1) ** k, factorial(k + 1)) for k in range(n + 1)]
    return MSeries.univariate(reg, "eta", coeffs)


def _bernoulli_tail(reg: VarRegistry) -> MSeries:
    """``1/(exp(eta) - 1) - 1/eta`` via exact division by the detected factor of eta."""
    n = reg.order("eta")
    wide = reg.with_orders(eta=n + 2)
    e = MSeries.exp_linear(wide, "eta", 1) - 1  # eta * unit
    lx = unit_times_power(e, "eta")  # eta^1 * u
    inv = lx.invert()  # eta^-1 * u^-1
    minus = LaurentX(MSeries.one(inv.reg), (-1,) + (0,) * (len(wide) - 1), "eta")
    diff = inv - minus  # regular: principal parts cancel
    diff = diff.normalize()
    if diff.shift[0] < 0:
        raise ArithmeticError("principal parts failed to cancel")
    out = {}
    for exps, c in diff.terms().items():
        if exps[0] <= n:
            out[exps] = c
    return MSeries(reg, out)


def chern_data(q: IndexQuery, reg: VarRegistry | None = None) -> dict[str, CohomClass]:
    """Chern characters and Todd class on the component labelled ``i``.

    The returned classes live in a registry ``(eta, theta, r, t)``:

    * ``ch_E``: ``(3g-3-2i - theta) exp(-eta)``
    * ``ch_Sym``: ``(1 - t^2 zeta)**-(2 ibar + g - 1) * exp(t^2 zeta theta / (1 - t^2 zeta))``
    * ``td``: ``(eta/(1 - 1/zeta))**(2i-g+1) * exp(theta/(zeta - 1) - theta/eta)``
    * ``ch_L``: ``t**ibar zeta**ibar exp(theta/2)`` and ``ch_L2`` its square
    * ``ch_Lambda_sprime``: the exterior-power character at ``s'``
    * ``ch_Lambda``: its average over ``s' -> -s'``
    """
    g, i, ibar, n = q.g, q.i, q.ibar, q.n
    if i >= g - 1:
        raise UnsupportedComponent(f"component i={i} has no smooth-fixed-locus description for g={g}")
    if reg is None:
        R = q.s_degree
        reg = CohomClass.registry(n, g, r=R, t=q.order_t + R)
    one = MSeries.one(reg)
    theta = MSeries.var(reg, "theta")
    t = MSeries.var(reg, "t")
    r = MSeries.var(reg, "r")
    zeta = _exp_eta(reg, 1)

    ch_E = (one.scale(3 * g - 3 - 2 * i) - theta) * _exp_eta(reg, -1)

    u_sym = 1 - t * t * zeta
    ch_Sym = u_sym.power(-(2 * ibar + g - 1)) * (t * t * zeta * theta * u_sym.invert()).exp()

    td = _eta_over_expm1_inverse_unit(reg).power(-(2 * i - g + 1)) * (theta * _bernoulli_tail(reg)).exp()

    ch_L = t.power(ibar) * _exp_eta(reg, ibar) * (theta.scale(mpq(1, 2))).exp()

    def lam(sign: int) -> MSeries:
        rr = r.scale(sign)
        a = rr * t * _exp_eta(reg, mpq(-1, 2))  # s'
        b = rr * t * t * _exp_eta(reg, mpq(1, 2))  # s' t zeta
        c = rr * _exp_eta(reg, mpq(-1, 2))  # s'/t
        d = rr * t * _exp_eta(reg, mpq(1, 2))  # s' zeta
        frac = lambda w: w * (1 + w).invert()
        expo = theta.scale(mpq(1, 4)) * (frac(a) + frac(b) - frac(c) - frac(d))
        return expo.exp() * ((1 + c) * (1 + b)).power(g - 1 + ibar) * ((1 + a) * (1 + d)).power(i)

    lam_plus = lam(1)
    wrap = lambda m: CohomClass(m, n, g)
    return {
        "ch_E": wrap(ch_E),
        "ch_Sym": wrap(ch_Sym),
        "td": wrap(td),
        "ch_L": wrap(ch_L),
        "ch_L2": wrap(ch_L * ch_L),
        "ch_Lambda_sprime": wrap(lam_plus),
        "ch_Lambda": wrap((lam_plus + lam_plus.scale_var("r", -1)).scale(mpq(1, 2))),
    }


def _to_s_graded(m: MSeries, g: int, i: int, s_order: int, t_order: int) -> SGradedSeries:
    coeffs = {(p, q - p): c for (p, q), c in m.terms().items()}
    return SGradedSeries(coeffs, s_order, t_order, g, i)


def direct_integrand(q: IndexQuery) -> CohomClass:
    d = chern_data(q)
    return d["ch_L2"] * d["ch_Lambda"] * d["ch_Sym"] * d["td"]


def direct_index(q: IndexQuery) -> IndexSeries | SGradedSeries:
    """``2**(2g) int_{C_{2i}} ch(L^2) ch(Lambda_{s^2}) ch(Sym E*) td``.

    Returns the ``s**(2j)`` component when ``q.j`` is set, otherwise the full
    ``s``-graded series.
    """
    total = integrate_Cn(direct_integrand(q)).scale(2 ** (2 * q.g))
    graded = _to_s_graded(total, q.g, q.i, q.s_degree, q.order_t)
    if q.j is None:
        return graded
    if q.j < 0:
        return IndexSeries({}, q.order_t, q.g, q.i, q.j, "direct_index")
    out = graded.lambda_component(q.j)
    out.label = "direct_index"
    return out


# ---------------------------------------------------------------------------
# the dual of L_i


@dataclass
class LidualReport:
    g: int
    i: int
    passed: bool
    equivariant_exponent: dict[str, mpq]
    expected_exponent: dict[str, mpq]
    nonequivariant_passed: bool
    canonical_passed: bool
    lambda_star_invariant: bool
    detail: str = ""

    def to_json_obj(self) -> dict:
        fmt = lambda d: {k: str(v) for k, v in d.items()}
        return {
            "g": self.g,
            "i": self.i,
            "passed": self.passed,
            "equivariant_exponent": fmt(self.equivariant_exponent),
            "expected_exponent": fmt(self.expected_exponent),
            "nonequivariant_passed": self.nonequivariant_passed,
            "canonical_passed": self.canonical_passed,
            "lambda_star_invariant": self.lambda_star_invariant,
            "detail": self.detail,
        }


def _linear(reg: VarRegistry, coeffs: Mapping[str, object]) -> MSeries:
    out = MSeries.zero(reg)
    for name, c in coeffs.items():
        out = out + MSeries.var(reg, name).scale(c)
    return out


def _add_forms(*forms: Mapping[str, object]) -> dict[str, mpq]:
    out: dict[str, mpq] = {}
    for f in forms:
        for k, v in f.items():
            out[k] = out.get(k, 0) + rat(v)
    return {k: v for k, v in out.items() if v}


def lambda_star_invariant(g: int, i: int, u_order: int = 4, s_order: int = 4) -> bool:
    """``ch_T(Lambda_{s^2})`` is fixed by the star involution (with ``t = exp(-u)``)."""
    ibar = g - 1 - i
    n = 2 * i
    reg = CohomClass.registry(n, g, u=u_order, s=s_order)
    theta = MSeries.var(reg, "theta")
    s = MSeries.var(reg, "s")
    E = lambda eta_c, u_c: MSeries.exp_linear(reg, "eta", eta_c) * MSeries.exp_linear(reg, "u", u_c)

    def lam(sign):
        ss = s.scale(sign)
        a = ss * E(mpq(-1, 2), 0)  # s'
        b = ss * E(mpq(1, 2), -1)  # s' t zeta
        c = ss * E(mpq(-1, 2), 1)  # s'/t
        d = ss * E(mpq(1, 2), 0)  # s' zeta
        frac = lambda w: w * (1 + w).invert()
        expo = theta.scale(mpq(1, 4)) * (frac(a) + frac(b) - frac(c) - frac(d))
        return expo.exp() * ((1 + c) * (1 + b)).power(g - 1 + ibar) * ((1 + a) * (1 + d)).power(i)

    cls = CohomClass((lam(1) + lam(-1)).scale(mpq(1, 2)), n, g)
    return cls.star() == cls


def verify_lidual(q: IndexQuery, u_order: int | None = None) -> LidualReport:
    """Check the displayed formula for the starred Chern character of ``L_i``.

    The exponent ``c1(E_i*) + c1(T*_F) + c1(L^-2)`` with the stated
    equivariant weights is compared, as an exact class in ``(eta, theta, u)``,
    against the exponent of ``t**-1 ch_T(L^2)`` (``t = exp(-u)``).  The same
    comparison at ``u = 0``, the canonical-class identity ``c1(K) = 4 c1(L)``
    and the star invariance of the exterior-power character are reported
    alongside.
    """
    g, i, ibar = q.g, q.i, q.ibar
    if i >= g - 1:
        raise UnsupportedComponent(f"i={i} out of range for g={g}")
    n = 2 * i
    U = u_order if u_order is not None else 2 * g
    reg = CohomClass.registry(n, g, u=U)

    c1_Estar = {"eta": g - 1 + 2 * ibar, "u": -(g - 1 + 2 * ibar), "theta": 1}
    c1_Tstar = {"eta": g - 1 - 2 * i, "theta": 1, "u": g + 2 * i}
    c1_Lm2 = {"eta": -2 * ibar, "u": 2 * ibar, "theta": -1}
    lhs_form = _add_forms(c1_Estar, c1_Tstar, c1_Lm2)
    # t^-1 ch_T(L^2) = exp(u) * exp(2 ibar (eta - u) + theta)
    rhs_form = _add_forms({"eta": 2 * ibar, "u": -2 * ibar, "theta": 1}, {"u": 1})

    sign = (-1) ** (4 * g - 3)
    lhs = CohomClass(_linear(reg, lhs_form).exp().scale(sign), n, g)
    rhs = CohomClass(_linear(reg, rhs_form).exp().scale(-1), n, g)
    passed = lhs == rhs

    shadow_reg = CohomClass.registry(n, g)
    drop_u = lambda f: {k: v for k, v in f.items() if k != "u"}
    shadow = _linear(shadow_reg, drop_u(lhs_form)).exp().scale(sign) == _linear(shadow_reg, drop_u(rhs_form)).exp().scale(-1)

    c1_K = _add_forms({"eta": g - 2 * i - 1, "theta": 1}, {"eta": 3 * g - 3 - 2 * i, "theta": 1})
    c1_L4 = _add_forms({"eta": 4 * ibar, "theta": 2})
    canonical = c1_K == c1_L4

    star_ok = lambda_star_invariant(g, i)

    diff = _add_forms(lhs_form, {k: -v for k, v in rhs_form.items()})
    detail = "" if passed else "exponents differ by " + ", ".join(f"{v}*{k}" for k, v in sorted(diff.items()))
    return LidualReport(g, i, passed, lhs_form, rhs_form, shadow, canonical, star_ok, detail)


# ---------------------------------------------------------------------------
# equivariant Euler forms from the displayed duality relations


def euler_L_Lambda(g: int, i: int, j: int, order_t: int) -> IndexSeries:
    """``chi_T(L_i, Lambda_j)`` assembled on ``C_{2i}`` with ``ch(L_i)^* = -t^-1 ch(L^2)/ch(Sym N*)``."""
    q = IndexQuery(g, i, j, order_t + 1)
    return direct_index(q).shifted(-1, -1).truncated(order_t)


def euler_Lambda_L(g: int, i: int, j: int, order_t: int) -> IndexSeries:
    """``chi_T(Lambda_i, L_j)`` on ``C_{2j}`` using the star invariance of ``ch(Lambda_i)``."""
    q = IndexQuery(g, j, i, order_t + g)
    return direct_index(q).shifted(-g).truncated(order_t)
