"""Exact truncated multivariate power series and Laurent series.

Every series lives in a :class:`VarRegistry`: an ordered set of variable
names, each with a maximal retained exponent.  Products silently drop any
monomial whose exponent leaves that box, so all identities computed here
hold modulo the ideal generated by ``x_k ** (N_k + 1)``.

Coefficients are :class:`gmpy2.mpq` rationals; nothing is ever rounded.

Internally an exponent tuple is packed into one Python integer, one bit
field per variable plus a guard bit.  Adding packed keys adds exponents, and
a single mask test decides whether the sum is still inside the truncation
box.  The public surface only ever shows tuples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import gmpy2
from gmpy2 import mpq

Rat = mpq

__all__ = [
    "Rat",
    "rat",
    "rat_str",
    "SeriesError",
    "RegistryMismatch",
    "ZeroConstantTerm",
    "NonzeroConstantTerm",
    "NotUnitOnePlus",
    "IdenticallyZeroWithinTruncation",
    "InsufficientTruncation",
    "VarRegistry",
    "MSeries",
    "LaurentX",
    "unit_times_power",
]


class SeriesError(ArithmeticError):
    """Base class for series-kernel failures."""


class RegistryMismatch(SeriesError, ValueError):
    pass


class ZeroConstantTerm(SeriesError, ZeroDivisionError):
    pass


class NonzeroConstantTerm(SeriesError):
    pass


class NotUnitOnePlus(SeriesError):
    pass


class IdenticallyZeroWithinTruncation(SeriesError):
    """No nonzero coefficient up to the truncation bound: the valuation is undecidable."""


class InsufficientTruncation(SeriesError):
    pass


def rat(value) -> mpq:
    """Coerce ints, Fractions, mpq and ``"n/d"`` strings to an exact rational."""
    if isinstance(value, type(mpq())):
        return value
    if isinstance(value, (int, type(gmpy2.mpz()))):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        num, _, den = value.strip().partition("/")
        return mpq(int(num), int(den) if den else 1)
    if isinstance(value, float):
        raise TypeError("floating point values are not exact; pass a Fraction or string")
    raise TypeError(f"cannot convert {value!r} to a rational")


def rat_str(value: mpq) -> str:
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class VarRegistry:
    """Ordered variable names with per-variable truncation orders."""

    names: tuple[str, ...]
    orders: tuple[int, ...]
    _width: int = field(init=False, repr=False, compare=False)
    _guard: int = field(init=False, repr=False, compare=False)
    _bound: int = field(init=False, repr=False, compare=False)
    _limit: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = tuple(self.names)
        orders = tuple(int(n) for n in self.orders)
        if len(names) != len(orders):
            raise ValueError("names and orders differ in length")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if any(n < 0 for n in orders):
            raise ValueError("truncation orders must be nonnegative")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "orders", orders)
        width = max([n.bit_length() for n in orders] + [0]) + 2
        guard = sum(1 << (width * k + width - 1) for k in range(len(names)))
        bound = sum(n << (width * k) for k, n in enumerate(orders))
        object.__setattr__(self, "_width", width)
        object.__setattr__(self, "_guard", guard)
        object.__setattr__(self, "_bound", bound)
        object.__setattr__(self, "_limit", bound | guard)

    @classmethod
    def of(cls, **orders: int) -> "VarRegistry":
        return cls(tuple(orders), tuple(orders.values()))

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"variable {name!r} not in registry {self.names}") from None

    def order(self, name: str) -> int:
        return self.orders[self.index(name)]

    def with_orders(self, **orders: int) -> "VarRegistry":
        new = list(self.orders)
        for name, n in orders.items():
            new[self.index(name)] = n
        return VarRegistry(self.names, tuple(new))

    def drop(self, name: str) -> "VarRegistry":
        k = self.index(name)
        return VarRegistry(self.names[:k] + self.names[k + 1:], self.orders[:k] + self.orders[k + 1:])

    def pack(self, exps: Sequence[int]) -> int:
        key = 0
        for k, e in enumerate(exps):
            key |= e << (self._width * k)
        return key

    def unpack(self, key: int) -> tuple[int, ...]:
        w = self._width
        mask = (1 << w) - 1
        return tuple((key >> (w * k)) & mask for k in range(len(self.names)))

    def contains(self, exps: Sequence[int]) -> bool:
        return len(exps) == len(self.names) and all(0 <= e <= n for e, n in zip(exps, self.orders))

    def _ok(self, key: int) -> bool:
        return (self._limit - key) & self._guard == self._guard

    @property
    def max_degree(self) -> int:
        return sum(self.orders)


def _strip(terms: dict) -> dict:
    return {k: c for k, c in terms.items() if c}


def _mul_terms(a: dict, b: dict, reg: VarRegistry) -> dict:
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    limit, guard, bound = reg._limit, reg._guard, reg._bound
    bs = sorted(b.items())
    out: dict = {}
    get = out.get
    for ka, ca in a.items():
        top = bound - ka
        for kb, cb in bs:
            if kb > top:
                break
            k = ka + kb
            if (limit - k) & guard != guard:
                continue
            out[k] = get(k, 0) + ca * cb
    return _strip(out)


class MSeries:
    """A truncated multivariate power series with exact rational coefficients.

    Instances are immutable by convention: every operation returns a new
    series.
    """

    __slots__ = ("reg", "_t")

    def __init__(self, reg: VarRegistry, terms: Mapping[Sequence[int], object] | None = None):
        self.reg = reg
        packed: dict = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(reg):
                raise ValueError(f"exponent {exps} does not match registry {reg.names}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent {exps} in a power series")
            if not reg.contains(exps):
                continue
            c = rat(c)
            if c:
                key = reg.pack(exps)
                packed[key] = packed.get(key, 0) + c
        self._t = _strip(packed)

    @classmethod
    def _raw(cls, reg: VarRegistry, packed: dict) -> "MSeries":
        s = cls.__new__(cls)
        s.reg = reg
        s._t = packed
        return s

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, reg: VarRegistry) -> "MSeries":
        return cls._raw(reg, {})

    @classmethod
    def const(cls, reg: VarRegistry, c=1) -> "MSeries":
        c = rat(c)
        return cls._raw(reg, {0: c} if c else {})

    @classmethod
    def one(cls, reg: VarRegistry) -> "MSeries":
        return cls.const(reg, 1)

    @classmethod
    def monomial(cls, reg: VarRegistry, exps: Mapping[str, int] | Sequence[int], c=1) -> "MSeries":
        if isinstance(exps, Mapping):
            vec = [0] * len(reg)
            for name, e in exps.items():
                vec[reg.index(name)] = e
            exps = vec
        return cls(reg, {tuple(exps): c})

    @classmethod
    def var(cls, reg: VarRegistry, name: str) -> "MSeries":
        return cls.monomial(reg, {name: 1})

    @classmethod
    def univariate(cls, reg: VarRegistry, name: str, coeffs: Sequence) -> "MSeries":
        k = reg.index(name)
        w = reg._width * k
        n = reg.orders[k]
        terms = {}
        for e, c in enumerate(coeffs[: n + 1]):
            c = rat(c)
            if c:
                terms[e << w] = c
        return cls._raw(reg, terms)

    @classmethod
    def exp_linear(cls, reg: VarRegistry, name: str, a) -> "MSeries":
        """``exp(a * name)`` for a rational constant ``a``."""
        a = rat(a)
        n = reg.order(name)
        coeffs, c = [], mpq(1)
        for e in range(n + 1):
            coeffs.append(c)
            c = c * a / (e + 1)
        return cls.univariate(reg, name, coeffs)

    # -- inspection ---------------------------------------------------------
    def terms(self) -> dict[tuple[int, ...], mpq]:
        return {self.reg.unpack(k): c for k, c in sorted(self._t.items(), key=lambda kv: self.reg.unpack(kv[0]))}

    def items(self) -> Iterator[tuple[tuple[int, ...], mpq]]:
        return iter(self.terms().items())

    def __len__(self) -> int:
        return len(self._t)

    def coeff(self, exps: Mapping[str, int] | Sequence[int]) -> mpq:
        if isinstance(exps, Mapping):
            vec = [0] * len(self.reg)
            for name, e in exps.items():
                vec[self.reg.index(name)] = e
            exps = vec
        if not self.reg.contains(tuple(exps)):
            raise InsufficientTruncation(f"exponent {tuple(exps)} outside truncation {self.reg.orders}")
        return self._t.get(self.reg.pack(exps), mpq(0))

    @property
    def constant_term(self) -> mpq:
        return self._t.get(0, mpq(0))

    def is_zero(self) -> bool:
        return not self._t

    def min_exponent(self, name: str) -> int | None:
        k = self.reg.index(name)
        exps = [self.reg.unpack(key)[k] for key in self._t]
        return min(exps) if exps else None

    def max_exponent(self, name: str) -> int | None:
        k = self.reg.index(name)
        exps = [self.reg.unpack(key)[k] for key in self._t]
        return max(exps) if exps else None

    def coefficient(self, name: str, e: int) -> "MSeries":
        """Coefficient of ``name**e`` as a series in the remaining variables."""
        k = self.reg.index(name)
        if not 0 <= e <= self.reg.orders[k]:
            raise InsufficientTruncation(f"{name}^{e} outside truncation order {self.reg.orders[k]}")
        sub = self.reg.drop(name)
        out = {}
        for key, c in self._t.items():
            exps = self.reg.unpack(key)
            if exps[k] == e:
                out[sub.pack(exps[:k] + exps[k + 1:])] = c
        return MSeries._raw(sub, out)

    def degree_parts(self) -> dict[int, dict]:
        parts: dict[int, dict] = {}
        for key, c in self._t.items():
            d = sum(self.reg.unpack(key))
            parts.setdefault(d, {})[key] = c
        return parts

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "MSeries"):
        if self.reg != other.reg:
            raise RegistryMismatch(f"{self.reg} vs {other.reg}")

    def _coerce(self, other) -> "MSeries":
        if isinstance(other, MSeries):
            self._check(other)
            return other
        return MSeries.const(self.reg, other)

    def __add__(self, other) -> "MSeries":
        other = self._coerce(other)
        out = dict(self._t)
        for k, c in other._t.items():
            out[k] = out.get(k, 0) + c
        return MSeries._raw(self.reg, _strip(out))

    __radd__ = __add__

    def __neg__(self) -> "MSeries":
        return MSeries._raw(self.reg, {k: -c for k, c in self._t.items()})

    def __sub__(self, other) -> "MSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MSeries":
        return self._coerce(other) - self

    def scale(self, c) -> "MSeries":
        c = rat(c)
        if not c:
            return MSeries.zero(self.reg)
        return MSeries._raw(self.reg, {k: v * c for k, v in self._t.items()})

    def __mul__(self, other) -> "MSeries":
        if isinstance(other, MSeries):
            self._check(other)
            return MSeries._raw(self.reg, _mul_terms(self._t, other._t, self.reg))
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "MSeries":
        if isinstance(other, MSeries):
            return self * other.invert()
        return self.scale(1 / rat(other))

    def __pow__(self, n: int) -> "MSeries":
        return self.power(n)

    def __eq__(self, other) -> bool:
        if isinstance(other, MSeries):
            return self.reg == other.reg and self._t == other._t
        try:
            return self == MSeries.const(self.reg, other)
        except TypeError:
            return NotImplemented

    __hash__ = None

    def first_difference(self, other: "MSeries") -> tuple[int, ...] | None:
        """Lexicographically smallest exponent where the two series differ."""
        self._check(other)
        diff = self - other
        if diff.is_zero():
            return None
        return min(self.reg.unpack(k) for k in diff._t)

    # -- graded recurrences -------------------------------------------------
    # With D the total-degree operator, every analytic operation below solves a
    # first-order relation degree by degree: D(b) = b * D(log a) and friends.
    def _graded_solve(self, b0: mpq, kernel) -> "MSeries":
        reg = self.reg
        a0 = self.constant_term
        parts = (self - a0).degree_parts() if a0 else self.degree_parts()
        degs = sorted(parts)
        b_parts: dict[int, dict] = {0: {0: b0} if b0 else {}}
        for n in range(1, reg.max_degree + 1):
            acc: dict = {}
            for k in degs:
                if k > n:
                    break
                prev = b_parts.get(n - k)
                if not prev:
                    continue
                w = kernel(n, k)
                if not w:
                    continue
                for key, c in _mul_terms(parts[k], prev, reg).items():
                    acc[key] = acc.get(key, 0) + w * c
            finish = kernel(n, None)
            b_parts[n] = {key: c * finish for key, c in acc.items() if c}
        out: dict = {}
        for part in b_parts.values():
            out.update(part)
        return MSeries._raw(reg, _strip(out))

    def invert(self) -> "MSeries":
        a0 = self.constant_term
        if not a0:
            raise ZeroConstantTerm("series with vanishing constant term is not invertible")
        inv0 = 1 / a0
        return self._graded_solve(inv0, lambda n, k: -inv0 if k is None else 1)

    def exp(self) -> "MSeries":
        if self.constant_term:
            raise NonzeroConstantTerm("exp needs a series with zero constant term")
        return self._graded_solve(mpq(1), lambda n, k: mpq(1, n) if k is None else k)

    def log1p(self) -> "MSeries":
        """``log(1 + self)`` for a series without constant term."""
        if self.constant_term:
            raise NotUnitOnePlus("log1p needs a series with zero constant term")
        # (1 + a) D L = D a, solved for L degree by degree
        parts = self.degree_parts()
        reg = self.reg
        degs = sorted(parts)
        l_parts: dict[int, dict] = {}
        for n in range(1, reg.max_degree + 1):
            acc = {key: n * c for key, c in parts.get(n, {}).items()}
            for k in degs:
                if k >= n:
                    break
                prev = l_parts.get(n - k)
                if not prev:
                    continue
                for key, c in _mul_terms(parts[k], prev, reg).items():
                    acc[key] = acc.get(key, 0) - (n - k) * c
            l_parts[n] = {key: c / n for key, c in acc.items() if c}
        out: dict = {}
        for part in l_parts.values():
            out.update(part)
        return MSeries._raw(reg, _strip(out))

    def pow_rational(self, alpha) -> "MSeries":
        """Principal branch of ``self ** alpha``.

        The constant term must be a nonzero rational with an exact
        ``alpha``-th power (``1`` always qualifies).
        """
        alpha = rat(alpha)
        a0 = self.constant_term
        if not a0:
            raise NotUnitOnePlus("rational power needs a nonzero constant term")
        b0 = _exact_rational_power(a0, alpha)
        return self._graded_solve(
            b0, lambda n, k: 1 / (n * a0) if k is None else alpha * k - (n - k)
        )

    def power(self, n: int) -> "MSeries":
        n = int(n)
        if n < 0:
            return self.invert().power(-n)
        if n == 0:
            return MSeries.one(self.reg)
        if n == 1:
            return self
        if self.constant_term and len(self._t) > 2 and n > 2:
            return self.pow_rational(n)
        result, base = None, self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus and substitutions -----------------------------------------
    def derivative(self, name: str) -> "MSeries":
        k = self.reg.index(name)
        step = 1 << (self.reg._width * k)
        out = {}
        for key, c in self._t.items():
            e = self.reg.unpack(key)[k]
            if e:
                out[key - step] = c * e
        return MSeries._raw(self.reg, out)

    def euler(self) -> "MSeries":
        """Total-degree operator ``sum_k x_k d/dx_k``."""
        return MSeries._raw(self.reg, _strip({k: c * sum(self.reg.unpack(k)) for k, c in self._t.items()}))

    def shift(self, exps: Mapping[str, int] | Sequence[int]) -> "MSeries":
        """Multiply by a monomial with nonnegative exponents (truncating)."""
        if isinstance(exps, Mapping):
            vec = [0] * len(self.reg)
            for name, e in exps.items():
                vec[self.reg.index(name)] = e
            exps = vec
        if any(e < 0 for e in exps):
            raise ValueError("shift exponents must be nonnegative; use LaurentX")
        step = self.reg.pack(exps)
        ok = self.reg._ok
        return MSeries._raw(self.reg, {k + step: c for k, c in self._t.items() if ok(k + step)})

    def scale_var(self, name: str, c) -> "MSeries":
        """Substitute ``name -> c * name``."""
        c = rat(c)
        k = self.reg.index(name)
        out = {}
        for key, v in self._t.items():
            out[key] = v * c ** self.reg.unpack(key)[k]
        return MSeries._raw(self.reg, _strip(out))

    def reregister(self, reg: VarRegistry, offset: Sequence[int] | None = None) -> "MSeries":
        """Move to another registry with the same names, dropping terms outside it.

        ``offset`` (per variable, may be negative) is added to every exponent;
        terms pushed below zero are an error.
        """
        if reg.names != self.reg.names:
            raise RegistryMismatch(f"{self.reg.names} vs {reg.names}")
        out = {}
        for key, c in self._t.items():
            exps = self.reg.unpack(key)
            if offset is not None:
                exps = tuple(e + d for e, d in zip(exps, offset))
                if any(e < 0 for e in exps):
                    raise ValueError(f"offset moves exponent to {exps}")
            if reg.contains(exps):
                out[reg.pack(exps)] = c
        return MSeries._raw(reg, out)

    def truncate(self, **orders: int) -> "MSeries":
        return self.reregister(self.reg.with_orders(**orders))

    def evaluate(self, **values) -> complex:
        """Numeric value at the given point (floating point, for reporting only)."""
        vals = [values[n] for n in self.reg.names]
        total = 0
        for key, c in self._t.items():
            term = complex(float(c))
            for v, e in zip(vals, self.reg.unpack(key)):
                if e:
                    term *= v ** e
            total += term
        return total

    # -- serialization ------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "variables": list(self.reg.names),
            "orders": list(self.reg.orders),
            "terms": [[list(e), rat_str(c)] for e, c in self.terms().items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "MSeries":
        reg = VarRegistry(tuple(obj["variables"]), tuple(obj["orders"]))
        return cls(reg, {tuple(e): rat(c) for e, c in obj["terms"]})

    @classmethod
    def from_json(cls, text: str) -> "MSeries":
        return cls.from_json_obj(json.loads(text))

    def __repr__(self) -> str:
        if not self._t:
            return f"MSeries(0; {dict(zip(self.reg.names, self.reg.orders))})"
        pieces = []
        for exps, c in self.terms().items():
            mono = "*".join(
                n if e == 1 else f"{n}^{e}" for n, e in zip(self.reg.names, exps) if e
            )
            pieces.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(pieces)


def _exact_rational_power(c: mpq, alpha: mpq) -> mpq:
    if alpha.denominator == 1:
        return c ** int(alpha)
    q = int(alpha.denominator)
    p = int(alpha.numerator)
    if c < 0 and q % 2 == 0:
        raise NotUnitOnePlus(f"no real {q}-th root of {c}")
    sign = -1 if c < 0 else 1
    num, ok_n = gmpy2.iroot(abs(c.numerator), q)
    den, ok_d = gmpy2.iroot(c.denominator, q)
    if not (ok_n and ok_d):
        raise NotUnitOnePlus(f"{c} has no exact rational {q}-th root")
    return mpq(sign * int(num), int(den)) ** p


class LaurentX:
    """A monomial times a truncated power series: ``prod_k v_k**shift[k] * body``.

    One variable (``var``, the residue variable) is distinguished; its
    negative shift is the pole order.  Other shifts default to zero; they may
    be negative when a local chart produces Laurent behaviour in a grading
    variable, which keeps the body's truncation honest.

    The body is known modulo ``v_k**(N_k + 1)`` where ``N_k`` are its
    registry orders; binary operations work at the coarser of two precisions.
    """

    __slots__ = ("body", "shift", "var")

    def __init__(self, body: MSeries, shift: Sequence[int] | Mapping[str, int] | None = None, var: str = "x"):
        reg = body.reg
        if isinstance(shift, Mapping):
            vec = [0] * len(reg)
            for name, e in shift.items():
                vec[reg.index(name)] = e
            shift = vec
        self.body = body
        self.shift = tuple(shift) if shift is not None else (0,) * len(reg)
        if len(self.shift) != len(reg):
            raise ValueError("shift length does not match registry")
        self.var = var
        reg.index(var)

    @property
    def reg(self) -> VarRegistry:
        return self.body.reg

    @property
    def _vi(self) -> int:
        return self.reg.index(self.var)

    @property
    def pole_order(self) -> int:
        low = self.body.min_exponent(self.var)
        if low is None:
            return 0
        return max(0, -(self.shift[self._vi] + low))

    @classmethod
    def from_mseries(cls, m: MSeries, var: str = "x") -> "LaurentX":
        return cls(m, None, var)

    def normalize(self) -> "LaurentX":
        """Move the lowest power of the residue variable out of the body."""
        low = self.body.min_exponent(self.var)
        if not low:
            return self
        k = self._vi
        offset = [0] * len(self.reg)
        offset[k] = -low
        reg = self.reg.with_orders(**{self.var: self.reg.orders[k] - low})
        shift = list(self.shift)
        shift[k] += low
        return LaurentX(self.body.reregister(reg, offset), shift, self.var)

    def _common(self, other: "LaurentX") -> tuple[MSeries, MSeries]:
        if self.reg == other.reg:
            return self.body, other.body
        if self.reg.names != other.reg.names:
            raise RegistryMismatch(f"{self.reg.names} vs {other.reg.names}")
        orders = tuple(min(a, b) for a, b in zip(self.reg.orders, other.reg.orders))
        reg = VarRegistry(self.reg.names, orders)
        return self.body.reregister(reg), other.body.reregister(reg)

    def __mul__(self, other) -> "LaurentX":
        if isinstance(other, LaurentX):
            a, b = self._common(other)
            return LaurentX(a * b, tuple(x + y for x, y in zip(self.shift, other.shift)), self.var)
        if isinstance(other, MSeries):
            return self * LaurentX(other, None, self.var)
        return LaurentX(self.body.scale(other), self.shift, self.var)

    __rmul__ = __mul__

    def __neg__(self) -> "LaurentX":
        return LaurentX(-self.body, self.shift, self.var)

    def __add__(self, other) -> "LaurentX":
        if not isinstance(other, LaurentX):
            other = LaurentX(MSeries.const(self.reg, other), None, self.var)
        base = tuple(min(a, b) for a, b in zip(self.shift, other.shift))
        da = [s - m for s, m in zip(self.shift, base)]
        db = [s - m for s, m in zip(other.shift, base)]
        orders = tuple(
            min(d1 + n1, d2 + n2)
            for d1, n1, d2, n2 in zip(da, self.reg.orders, db, other.reg.orders)
        )
        reg = VarRegistry(self.reg.names, orders)
        return LaurentX(self.body.reregister(reg, da) + other.body.reregister(reg, db), base, self.var)

    def __sub__(self, other) -> "LaurentX":
        return self + (-other)

    def __pow__(self, n: int) -> "LaurentX":
        n = int(n)
        if n < 0:
            return self.invert() ** (-n)
        return LaurentX(self.body.power(n), tuple(e * n for e in self.shift), self.var)

    def invert(self) -> "LaurentX":
        """Inverse of a monomial times a unit (the body must have nonzero constant term)."""
        lx = self.normalize()
        if not lx.body.constant_term:
            raise ZeroConstantTerm("body is not a unit; factor out its valuation first")
        return LaurentX(lx.body.invert(), tuple(-e for e in lx.shift), self.var)

    def __truediv__(self, other) -> "LaurentX":
        if isinstance(other, LaurentX):
            return self * other.invert()
        return LaurentX(self.body / other, self.shift, self.var)

    def derivative(self) -> "LaurentX":
        """d/dvar; other shifted variables are treated as constants."""
        k = self._vi
        m = self.shift[k]
        body = self.body.scale(m) + self.body.derivative(self.var).shift({self.var: 1})
        shift = list(self.shift)
        shift[k] -= 1
        return LaurentX(body, shift, self.var)

    def log_derivative(self) -> "LaurentX":
        """d/dvar log(self) for a monomial times a unit."""
        lx = self.normalize()
        body = lx.body
        if not body.constant_term:
            raise ZeroConstantTerm("log-derivative needs a monomial times a unit")
        k = lx._vi
        m = lx.shift[k]
        inner = (body.derivative(self.var).shift({self.var: 1}) * body.invert()) + m
        shift = [0] * len(lx.reg)
        shift[k] = -1
        return LaurentX(inner, shift, self.var)

    def scale_var(self, name: str, c) -> "LaurentX":
        c = rat(c)
        m = self.shift[self.reg.index(name)]
        return LaurentX(self.body.scale_var(name, c).scale(c ** m), self.shift, self.var)

    def coeff(self, e: int) -> "LaurentX":
        """Coefficient of ``var**e`` as a Laurent object in the other variables."""
        k = self._vi
        local = e - self.shift[k]
        sub = self.reg.drop(self.var)
        rest = self.shift[:k] + self.shift[k + 1:]
        if local < 0:
            return _RestLaurent(MSeries.zero(sub), rest)
        if local > self.reg.orders[k]:
            raise InsufficientTruncation(
                f"need {self.var}^{local} in the body but it is truncated at {self.reg.orders[k]}"
            )
        return _RestLaurent(self.body.coefficient(self.var, local), rest)

    def residue(self) -> "_RestLaurent":
        """Exact coefficient of ``var**-1``."""
        return self.coeff(-1)

    def first_difference(self, other: "LaurentX") -> tuple[int, ...] | None:
        """First exponent (absolute, lexicographic) where the two values differ."""
        diff = self - other
        found = diff.body.first_difference(MSeries.zero(diff.body.reg))
        if found is None:
            return None
        return tuple(e + s for e, s in zip(found, diff.shift))

    def terms(self) -> dict[tuple[int, ...], mpq]:
        return {tuple(e + s for e, s in zip(exps, self.shift)): c for exps, c in self.body.terms().items()}

    def __repr__(self) -> str:
        mono = "*".join(f"{n}^{e}" for n, e in zip(self.reg.names, self.shift) if e)
        return f"LaurentX({mono or '1'} * ({self.body!r}))"


class _RestLaurent:
    """Shifted series left after extracting a coefficient of the residue variable."""

    __slots__ = ("body", "shift")

    def __init__(self, body: MSeries, shift: Sequence[int]):
        self.body = body
        self.shift = tuple(shift)

    @property
    def reg(self) -> VarRegistry:
        return self.body.reg

    def terms(self) -> dict[tuple[int, ...], mpq]:
        return {tuple(e + s for e, s in zip(exps, self.shift)): c for exps, c in self.body.terms().items()}

    def precision(self) -> tuple[int, ...]:
        """Largest absolute exponent per variable that is reliably known."""
        return tuple(n + s for n, s in zip(self.reg.orders, self.shift))

    def to_mseries(self) -> MSeries:
        if any(s < 0 for s in self.shift):
            lows = [self.body.min_exponent(n) for n in self.reg.names]
            if self.body.is_zero() or all((lo or 0) + s >= 0 for lo, s in zip(lows, self.shift)):
                pass
            else:
                raise ValueError("value has negative exponents; not a power series")
        reg = VarRegistry(self.reg.names, tuple(max(0, p) for p in self.precision()))
        return self.body.reregister(reg, self.shift)

    def __add__(self, other: "_RestLaurent") -> "_RestLaurent":
        a = LaurentX(_with_dummy(self.body), (0,) + self.shift, "_")
        b = LaurentX(_with_dummy(other.body), (0,) + other.shift, "_")
        c = a + b
        return _RestLaurent(c.body.coefficient("_", 0), c.shift[1:])

    def __repr__(self) -> str:
        return f"_RestLaurent(shift={self.shift}, body={self.body!r})"


def _with_dummy(m: MSeries) -> MSeries:
    reg = VarRegistry(("_",) + m.reg.names, (0,) + m.reg.orders)
    return MSeries(reg, {(0,) + e: c for e, c in m.terms().items()})


def unit_times_power(m: MSeries, var: str = "x") -> LaurentX:
    """Factor ``m = var**v * unit`` by scanning for the lowest nonzero power of ``var``.

    Raises IdenticallyZeroWithinTruncation when ``m`` vanishes up to the
    truncation bound, and ZeroConstantTerm when the lowest slice is not a
    unit in the remaining variables.
    """
    low = m.min_exponent(var)
    if low is None:
        raise IdenticallyZeroWithinTruncation(
            f"no nonzero coefficient up to {var}^{m.reg.order(var)}"
        )
    lx = LaurentX(m, None, var).normalize()
    if not lx.body.constant_term:
        raise ZeroConstantTerm(f"lowest {var}-slice of the series is not a unit")
    return lx
