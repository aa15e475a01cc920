"""Rational expressions in (z, s, v) kept in factored form.

Every expression used by the residue engine is a product of a constant, a
monomial ``s^a v^b z^k`` and integer powers of *atoms* ``1 + c s^a v^b z^k``.
Keeping the factorization makes local expansion cheap (each atom is a single
exponential in the local coordinate) and keeps valuations structural.

Logarithmic derivatives ``z d/dz log F`` are sums of terms ``u/(1+u)`` over
the atoms ``1+u`` of ``F``; they are represented by :class:`LogTerms`.

:class:`LPoly` is a small exact Laurent polynomial in (s, v, z) used to
check rational identities after clearing denominators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from gmpy2 import mpq

from .series import rat

Exps = tuple[int, int, int]  # exponents of (s, v, z)


@dataclass(frozen=True, order=True)
class Atom:
    """The factor ``1 + c * s^a * v^b * z^k``."""

    c: mpq
    a: int
    b: int
    k: int

    @property
    def exps(self) -> Exps:
        return (self.a, self.b, self.k)

    def inv_z(self) -> "Atom":
        return Atom(self.c, self.a, self.b, -self.k)

    def u(self, z, s, v):
        return complex(self.c) * s ** self.a * v ** self.b * z ** self.k

    def value(self, z, s, v):
        return 1 + self.u(z, s, v)

    def __str__(self) -> str:
        mono = "*".join(f"{n}^{e}" for n, e in zip("svz", self.exps) if e)
        return f"(1{'+' if self.c > 0 else '-'}{abs(self.c) if abs(self.c) != 1 else ''}{mono})"


def atom(c, a: int, b: int, k: int) -> Atom:
    return Atom(rat(c), a, b, k)


class Factored:
    """``const * s^a v^b z^k * prod atom**m``."""

    __slots__ = ("const", "mono", "atoms")

    def __init__(self, const=1, mono: Exps = (0, 0, 0), atoms: Mapping[Atom, int] | None = None):
        self.const = rat(const)
        self.mono = tuple(mono)
        self.atoms = {a: m for a, m in (atoms or {}).items() if m}

    def __mul__(self, other: "Factored") -> "Factored":
        atoms = dict(self.atoms)
        for a, m in other.atoms.items():
            atoms[a] = atoms.get(a, 0) + m
        mono = tuple(x + y for x, y in zip(self.mono, other.mono))
        return Factored(self.const * other.const, mono, atoms)

    def __pow__(self, n: int) -> "Factored":
        n = int(n)
        return Factored(self.const ** n, tuple(e * n for e in self.mono), {a: m * n for a, m in self.atoms.items()})

    def inverse(self) -> "Factored":
        return self ** -1

    def __truediv__(self, other: "Factored") -> "Factored":
        return self * other.inverse()

    def inv_z(self) -> "Factored":
        """Substitute ``z -> 1/z``."""
        a, b, k = self.mono
        return Factored(self.const, (a, b, -k), {at.inv_z(): m for at, m in self.atoms.items()})

    def log_derivative(self) -> "LogTerms":
        """``z d/dz log`` of this expression."""
        terms: dict[Atom, mpq] = {}
        for at, m in self.atoms.items():
            if at.k:
                terms[at] = terms.get(at, 0) + m * at.k
        return LogTerms(self.mono[2], terms)

    def evaluate(self, z, s, v) -> complex:
        a, b, k = self.mono
        val = complex(self.const) * s ** a * v ** b * z ** k
        for at, m in self.atoms.items():
            val *= at.value(z, s, v) ** m
        return val

    def to_lpoly_pair(self) -> tuple["LPoly", "LPoly"]:
        """Numerator and denominator as Laurent polynomials."""
        num = LPoly({self.mono: self.const})
        den = LPoly.one()
        for at, m in self.atoms.items():
            p = LPoly.from_atom(at)
            if m > 0:
                num = num * p ** m
            else:
                den = den * p ** (-m)
        return num, den

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Factored)
            and self.const == other.const
            and self.mono == other.mono
            and self.atoms == other.atoms
        )

    def __repr__(self) -> str:
        parts = [str(self.const)]
        if any(self.mono):
            parts.append("*".join(f"{n}^{e}" for n, e in zip("svz", self.mono) if e))
        parts += [f"{a}^{m}" for a, m in sorted(self.atoms.items())]
        return " * ".join(parts)


class LogTerms:
    """``const + sum_atoms w * u/(1+u)`` where each atom is ``1+u``."""

    __slots__ = ("const", "terms")

    def __init__(self, const, terms: Mapping[Atom, object]):
        self.const = rat(const)
        self.terms = {a: rat(w) for a, w in terms.items() if w}

    def evaluate(self, z, s, v) -> complex:
        val = complex(self.const)
        for at, w in self.terms.items():
            u = at.u(z, s, v)
            val += complex(w) * u / (1 + u)
        return val

    def to_lpoly_pair(self) -> tuple["LPoly", "LPoly"]:
        den = LPoly.one()
        for at in self.terms:
            den = den * LPoly.from_atom(at)
        num = den * LPoly.const(self.const)
        for at, w in self.terms.items():
            rest = LPoly.one()
            for other in self.terms:
                if other != at:
                    rest = rest * LPoly.from_atom(other)
            num = num + rest * LPoly({at.exps: at.c * w})
        return num, den


class LPoly:
    """Sparse Laurent polynomial in (s, v, z) with rational coefficients."""

    __slots__ = ("t",)

    def __init__(self, terms: Mapping[Exps, object] | None = None):
        self.t = {}
        for e, c in (terms or {}).items():
            c = rat(c)
            if c:
                e = tuple(e)
                self.t[e] = self.t.get(e, 0) + c
        self.t = {e: c for e, c in self.t.items() if c}

    @classmethod
    def one(cls) -> "LPoly":
        return cls({(0, 0, 0): 1})

    @classmethod
    def const(cls, c) -> "LPoly":
        return cls({(0, 0, 0): c})

    @classmethod
    def from_atom(cls, at: Atom) -> "LPoly":
        return cls({(0, 0, 0): 1, at.exps: at.c}) if any(at.exps) else cls.const(1 + at.c)

    def __add__(self, other: "LPoly") -> "LPoly":
        out = dict(self.t)
        for e, c in other.t.items():
            out[e] = out.get(e, 0) + c
        return LPoly(out)

    def __neg__(self) -> "LPoly":
        return LPoly({e: -c for e, c in self.t.items()})

    def __sub__(self, other: "LPoly") -> "LPoly":
        return self + (-other)

    def __mul__(self, other: "LPoly") -> "LPoly":
        out: dict = {}
        for e1, c1 in self.t.items():
            for e2, c2 in other.t.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0) + c1 * c2
        return LPoly(out)

    def __pow__(self, n: int) -> "LPoly":
        out = LPoly.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, LPoly) and self.t == other.t

    def is_zero(self) -> bool:
        return not self.t

    def evaluate(self, z, s, v) -> complex:
        return sum(complex(c) * s ** a * v ** b * z ** k for (a, b, k), c in self.t.items())

    def evaluate_exact(self, z: mpq, s: mpq, v: mpq) -> mpq:
        return sum((c * s ** a * v ** b * z ** k for (a, b, k), c in self.t.items()), mpq(0))

    def subs_z_inverse(self) -> "LPoly":
        return LPoly({(a, b, -k): c for (a, b, k), c in self.t.items()})

    def z_coefficients(self) -> dict[int, "LPoly"]:
        out: dict[int, dict] = {}
        for (a, b, k), c in self.t.items():
            out.setdefault(k, {})[(a, b, 0)] = c
        return {k: LPoly(v) for k, v in out.items()}

    def cleared(self) -> "LPoly":
        """Multiply by the monomial that makes every exponent nonnegative and minimal."""
        if not self.t:
            return self
        lows = [min(e[k] for e in self.t) for k in range(3)]
        return LPoly({tuple(x - l for x, l in zip(e, lows)): c for e, c in self.t.items()})

    def __repr__(self) -> str:
        return " + ".join(f"{c}*s^{a}v^{b}z^{k}" for (a, b, k), c in sorted(self.t.items())) or "0"


# The building blocks of the Bethe function and its companions.
A_S_ZV = atom(1, 1, -1, -1)  # 1 + s/(zv)
A_SVZ = atom(1, 1, 1, 1)  # 1 + svz
A_SV_Z = atom(1, 1, 1, -1)  # 1 + sv/z
A_SZ_V = atom(1, 1, -1, 1)  # 1 + sz/v
A_V2_Z2 = atom(-1, 0, 2, -2)  # 1 - v^2/z^2
A_V2Z2 = atom(-1, 0, 2, 2)  # 1 - v^2 z^2

ATOMS = (A_S_ZV, A_SVZ, A_SV_Z, A_SZ_V, A_V2_Z2, A_V2Z2)


def bethe_f() -> Factored:
    """The Bethe function ``f(z, s, v)``."""
    return Factored(
        1,
        (0, 0, 4),
        {A_V2_Z2: 2, A_S_ZV: 1, A_SVZ: 1, A_V2Z2: -2, A_SV_Z: -1, A_SZ_V: -1},
    )


def p_factor() -> Factored:
    return Factored(1, (0, 0, 0), {A_S_ZV: 1, A_SVZ: 1, A_SV_Z: 1, A_SZ_V: 1})


def q_factor() -> Factored:
    return Factored(1, (0, 0, 0), {A_V2_Z2: 1, A_V2Z2: 1})


def logderiv() -> LogTerms:
    """``z f'(z)/f(z)`` as a sum of atom terms."""
    return bethe_f().log_derivative()


def h_over_f() -> tuple[LogTerms, Factored]:
    """``h/f = logderiv * P/Q`` returned as its two factors."""
    return logderiv(), p_factor() / q_factor()


def main_integrand(g: int, i: int) -> tuple[Factored, LogTerms, int]:
    """Prefactor, bracket and bracket exponent of the index integrand ``dz/z``-density.

    The integrand is ``prefactor * bracket**g`` with the exponents written out
    directly in terms of ``i`` and ``ibar = g-1-i``.
    """
    ibar = g - 1 - i
    pre = Factored(
        1,
        (0, 0, 4 * ibar),
        {
            A_S_ZV: g - 1 + ibar,
            A_SVZ: g - 1 + ibar,
            A_SV_Z: i,
            A_SZ_V: i,
            A_V2Z2: -(2 * ibar + g - 1),
            A_V2_Z2: -(2 * i - g + 1),
        },
    )
    return pre, main_bracket(), g


def main_bracket() -> LogTerms:
    """The bracket ``4 + sum of u/(1+u) terms`` written term by term."""
    return LogTerms(4, {A_SV_Z: 1, A_SVZ: 1, A_V2Z2: -4, A_V2_Z2: -4, A_S_ZV: -1, A_SZ_V: -1})


def f_numeric(z, s, v) -> complex:
    return bethe_f().evaluate(z, s, v)


def logderiv_numeric(z, s, v) -> complex:
    return logderiv().evaluate(z, s, v)


def h_numeric(z, s, v) -> complex:
    return logderiv_numeric(z, s, v) * (bethe_f() * p_factor() / q_factor()).evaluate(z, s, v)


def w2_factored() -> Factored:
    """``w^2 = (sz+v)(vz+s) / ((szv+1)(sv+z))``."""
    # (sz+v) = v(1+sz/v), (vz+s) = vz(1+s/(zv)), (sv+z) = z(1+sv/z)
    return Factored(1, (0, 2, 0), {A_SZ_V: 1, A_S_ZV: 1, A_SVZ: -1, A_SV_Z: -1})


def w_sigma_factored() -> Factored:
    """``w * sigma = z^2 (1 - v^2/z^2)(vz+s) / ((1 - v^2 z^2)(sv+z))``."""
    return Factored(1, (0, 1, 2), {A_V2_Z2: 1, A_S_ZV: 1, A_V2Z2: -1, A_SV_Z: -1})
