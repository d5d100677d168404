"""Exact noncommutative algebra of polynomial differential operators.

Generators are holomorphic variables ``z_ij`` (1 <= j < i <= n), their
antiholomorphic partners ``zb_ij``, and the matching derivatives ``d_ij``
/ ``db_ij`` with [d_ij, z_ij] = 1; every other generator pair commutes.
Coefficients are exact multivariate polynomials in the spectral symbols
``u``, ``v`` and the weights ``s1..sn`` / ``sb1..sbn`` over Gaussian
rationals (see :mod:`gtkit.weyl._poly`).

Normal form: within a term all z's stand left of all d's, terms are keyed
by exponent tuples over a fixed global variable order

    z21 < z31 < ... (columns first) < zb21 < ... < d21 < ... < db21 < ...

and stored canonically (no zero terms, no duplicate keys), so equality of
operators is dictionary equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from ._poly import CoeffPoly, GaussRat, PolyRing

try:  # optional compiled twin for the normal-ordering hot path
    from ._core_cy import add_terms, apply_terms, mul_terms, scale_terms  # type: ignore
    from ._core import WeylResourceError

    CORE_BACKEND = "cython"
except ImportError:  # pragma: no cover - exercised when extension is absent
    from ._core import WeylResourceError, add_terms, apply_terms, mul_terms, scale_terms

    CORE_BACKEND = "python"

__all__ = [
    "WeylAlgebra",
    "WeylElement",
    "CoeffPoly",
    "GaussRat",
    "PolyRing",
    "WeylResourceError",
    "weyl_add",
    "weyl_mul",
    "weyl_commutator",
    "weyl_apply",
    "weyl_equal",
    "substitute_spectral",
    "CORE_BACKEND",
]

DEFAULT_TERM_CAP = 10**7


class WeylAlgebra:
    """Variable universe for rank ``n``, both sectors."""

    def __init__(self, n: int, term_cap: int = DEFAULT_TERM_CAP):
        if n < 2:
            raise ValueError("rank must be at least 2")
        self.n = n
        self.term_cap = term_cap
        pairs = sorted(((i, j) for i in range(2, n + 1) for j in range(1, i)), key=lambda p: (p[1], p[0]))
        self.pairs = [(i, j, False) for (i, j) in pairs] + [(i, j, True) for (i, j) in pairs]
        self.pair_index = {p: k for k, p in enumerate(self.pairs)}
        self.nvars = len(self.pairs)
        syms = ["u", "v"]
        syms += [f"s{k}" for k in range(1, n + 1)]
        syms += [f"sb{k}" for k in range(1, n + 1)]
        self.ring = PolyRing(syms)
        self._zero_exp = (0,) * self.nvars

    # -- element constructors ---------------------------------------------
    def zero(self) -> "WeylElement":
        return WeylElement(self, {})

    def one(self) -> "WeylElement":
        return WeylElement(self, {(self._zero_exp, self._zero_exp): self.ring.one()})

    def const(self, c) -> "WeylElement":
        p = c if isinstance(c, CoeffPoly) else self.ring.const(c)
        if p.is_zero():
            return self.zero()
        return WeylElement(self, {(self._zero_exp, self._zero_exp): p})

    def _gen(self, i: int, j: int, bar: bool, slot: int) -> "WeylElement":
        k = self.pair_index[(i, j, bar)]
        e = [0] * self.nvars
        e[k] = 1
        e = tuple(e)
        key = (e, self._zero_exp) if slot == 0 else (self._zero_exp, e)
        return WeylElement(self, {key: self.ring.one()})

    def z(self, i: int, j: int, bar: bool = False) -> "WeylElement":
        return self._gen(i, j, bar, 0)

    def d(self, i: int, j: int, bar: bool = False) -> "WeylElement":
        return self._gen(i, j, bar, 1)

    def u_sym(self) -> CoeffPoly:
        return self.ring.sym("u")

    def v_sym(self) -> CoeffPoly:
        return self.ring.sym("v")

    def sigma(self, k: int, bar: bool = False) -> CoeffPoly:
        return self.ring.sym(f"sb{k}" if bar else f"s{k}")

    def var_name(self, k: int, derivative: bool) -> str:
        i, j, bar = self.pairs[k]
        base = ("db" if bar else "d") if derivative else ("zb" if bar else "z")
        return f"{base}{i}{j}"

    def __eq__(self, other):
        return isinstance(other, WeylAlgebra) and self.n == other.n

    def __hash__(self):
        return hash(("WeylAlgebra", self.n))

    def __repr__(self):
        return f"WeylAlgebra(n={self.n})"


class WeylElement:
    """Normal-ordered operator; treat as immutable."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: WeylAlgebra, terms: dict):
        self.alg = alg
        self.terms = terms

    # -- structure ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def nterms(self) -> int:
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.alg == other.alg and self.terms == other.terms

    def __hash__(self):  # pragma: no cover - rarely needed
        return hash((self.alg, frozenset((k, hash(v)) for k, v in self.terms.items())))

    # -- arithmetic -----------------------------------------------------------
    def _coerce_scalar(self, c) -> CoeffPoly:
        return c if isinstance(c, CoeffPoly) else self.alg.ring.const(c)

    def __add__(self, other):
        if isinstance(other, (int, Fraction, GaussRat, CoeffPoly)):
            other = self.alg.const(other)
        if not isinstance(other, WeylElement):
            return NotImplemented
        return WeylElement(self.alg, add_terms(self.terms, other.terms))

    __radd__ = __add__

    def __neg__(self):
        return WeylElement(self.alg, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, GaussRat, CoeffPoly)):
            other = self.alg.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussRat, CoeffPoly)):
            return WeylElement(self.alg, scale_terms(self.terms, self._coerce_scalar(other)))
        if not isinstance(other, WeylElement):
            return NotImplemented
        return WeylElement(self.alg, mul_terms(self.terms, other.terms, self.alg.term_cap))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GaussRat, CoeffPoly)):
            return self * other  # coefficients are central
        return NotImplemented

    # -- spectral coefficient operations ------------------------------------
    def substitute(self, name: str, value: CoeffPoly) -> "WeylElement":
        out = {}
        for key, c in self.terms.items():
            q = c.substitute(name, value)
            if not q.is_zero():
                out[key] = q
        return WeylElement(self.alg, out)

    def spectral_degree(self, name: str = "u") -> int:
        return max((c.degree_in(name) for c in self.terms.values()), default=0)

    def spectral_coefficient(self, k: int, name: str = "u") -> "WeylElement":
        out = {}
        for key, c in self.terms.items():
            q = c.coefficient_of(name, k)
            if not q.is_zero():
                out[key] = q
        return WeylElement(self.alg, out)

    # -- dump -----------------------------------------------------------------
    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for zexp, dexp in sorted(self.terms, reverse=True):
            c = self.terms[(zexp, dexp)]
            factors = []
            for k, e in enumerate(zexp):
                if e:
                    name = self.alg.var_name(k, False)
                    factors.append(f"{name}^{e}" if e > 1 else name)
            for k, e in enumerate(dexp):
                if e:
                    name = self.alg.var_name(k, True)
                    factors.append(f"{name}^{e}" if e > 1 else name)
            cs = c.text()
            if len(c.terms) > 1:
                cs = f"({cs})"
            if not factors:
                parts.append(cs)
            elif cs == "1":
                parts.append("*".join(factors))
            elif cs == "-1":
                parts.append("-" + "*".join(factors))
            else:
                parts.append("*".join([cs] + factors))
        return " + ".join(parts)

    def __repr__(self):
        s = self.text()
        return f"<Weyl {s if len(s) < 120 else s[:117] + '...'}>"


# -- module-level operation surface ------------------------------------------


def weyl_add(a: WeylElement, b: WeylElement) -> WeylElement:
    return a + b


def weyl_mul(a: WeylElement, b: WeylElement) -> WeylElement:
    return a * b


def weyl_commutator(a: WeylElement, b: WeylElement) -> WeylElement:
    return a * b - b * a


def substitute_spectral(a: WeylElement, which: str, value: CoeffPoly) -> WeylElement:
    if which not in ("u", "v"):
        raise ValueError("spectral symbol must be 'u' or 'v'")
    return a.substitute(which, value)


def weyl_apply(a: WeylElement, p: WeylElement) -> WeylElement:
    """Act with ``a`` on the plain polynomial ``p`` (no derivative content)."""
    return WeylElement(a.alg, apply_terms(a.terms, p.terms))


def weyl_equal(a: WeylElement, b: WeylElement) -> bool:
    return a == b


def poly_of_z(alg: WeylAlgebra, monomials: Iterable[tuple]) -> WeylElement:
    """Build a polynomial in z/zb from (exponent-dict, coeff) pairs.

    ``exponent-dict`` maps (i, j, bar) -> power.
    """
    terms = {}
    for expd, coeff in monomials:
        e = [0] * alg.nvars
        for key, p in expd.items():
            e[alg.pair_index[key]] = p
        c = coeff if isinstance(coeff, CoeffPoly) else alg.ring.const(coeff)
        key = (tuple(e), alg._zero_exp)
        terms[key] = terms.get(key, alg.ring.zero()) + c
    return WeylElement(alg, {k: c for k, c in terms.items() if not c.is_zero()})
