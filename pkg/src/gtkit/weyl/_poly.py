"""Exact commutative coefficient arithmetic.

Coefficients of operator terms are multivariate polynomials in a fixed
tuple of symbols (spectral parameters and representation weights) with
Gaussian-rational coefficients.  Everything here is exact: plain
``fractions.Fraction`` for real values, :class:`GaussRat` when an
imaginary part is present.  Monomials are exponent tuples over the
ring's symbol list.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

__all__ = ["GaussRat", "PolyRing", "CoeffPoly"]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


class GaussRat:
    """Gaussian rational p + q*i with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, *a):
        raise AttributeError("GaussRat is immutable")

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __add__(self, other):
        if isinstance(other, GaussRat):
            return GaussRat(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return GaussRat(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other if isinstance(other, GaussRat) else GaussRat(-other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GaussRat):
            return GaussRat(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, (int, Fraction)):
            return GaussRat(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussRat(self.re / other, self.im / other)
        if isinstance(other, GaussRat):
            n = other.re * other.re + other.im * other.im
            if n == 0:
                raise ZeroDivisionError("division by zero GaussRat")
            return self * GaussRat(other.re / n, -other.im / n)
        return NotImplemented

    def conj(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        return f"GaussRat({self.re!r}, {self.im!r})"

    def text(self) -> str:
        """Canonical dump form ``(p+qi)/r`` over a common denominator."""
        if self.im == 0:
            return str(self.re)
        from math import gcd

        d = self.re.denominator * self.im.denominator // gcd(
            self.re.denominator, self.im.denominator
        )
        p = self.re.numerator * (d // self.re.denominator)
        q = self.im.numerator * (d // self.im.denominator)
        sign = "+" if q >= 0 else "-"
        body = f"({p}{sign}{abs(q)}i)"
        return body if d == 1 else f"{body}/{d}"


def _cmul(a, b):
    # Fraction*Fraction stays a Fraction; GaussRat handles the rest.
    return a * b


class PolyRing:
    """A fixed, ordered tuple of commuting symbols."""

    __slots__ = ("symbols", "index", "_zero", "_one")

    def __init__(self, symbols: Iterable[str]):
        self.symbols = tuple(symbols)
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols in ring")
        self.index = {s: i for i, s in enumerate(self.symbols)}
        n = len(self.symbols)
        self._zero = CoeffPoly(self, {})
        self._one = CoeffPoly(self, {(0,) * n: Fraction(1)})

    @property
    def nsym(self) -> int:
        return len(self.symbols)

    def zero(self) -> "CoeffPoly":
        return self._zero

    def one(self) -> "CoeffPoly":
        return self._one

    def const(self, c) -> "CoeffPoly":
        if isinstance(c, (int, Fraction)):
            c = Fraction(c)
        elif not isinstance(c, GaussRat):
            raise TypeError(f"not an exact coefficient: {c!r}")
        if not c:
            return self._zero
        return CoeffPoly(self, {(0,) * self.nsym: c})

    def sym(self, name: str) -> "CoeffPoly":
        i = self.index[name]
        e = [0] * self.nsym
        e[i] = 1
        return CoeffPoly(self, {tuple(e): Fraction(1)})

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"PolyRing{self.symbols}"


class CoeffPoly:
    """Multivariate polynomial over Gaussian rationals, canonical form.

    Terms live in ``self.terms``: exponent-tuple -> nonzero coefficient.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: Mapping[tuple, object]):
        self.ring = ring
        self.terms = dict(terms)

    # -- basic structure --------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self):
        z = (0,) * self.ring.nsym
        return self.terms.get(z, Fraction(0))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            other = self.ring.const(other)
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "CoeffPoly":
        if isinstance(other, CoeffPoly):
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return CoeffPoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return CoeffPoly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            if not other:
                return self.ring.zero()
            return CoeffPoly(self.ring, {e: _cmul(c, other) for e, c in self.terms.items()})
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(map(sum, zip(e1, e2)))
                c = _cmul(c1, c2)
                s = out.get(e)
                if s is None:
                    out[e] = c
                else:
                    s = s + c
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return CoeffPoly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        r = self.ring.one()
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b if k > 1 else b
            k >>= 1
        return r

    # -- symbol operations ---------------------------------------------------
    def degree_in(self, name: str) -> int:
        i = self.ring.index[name]
        return max((e[i] for e in self.terms), default=0)

    def substitute(self, name: str, value: "CoeffPoly") -> "CoeffPoly":
        """Replace ``name`` by the polynomial ``value`` (exact)."""
        i = self.ring.index[name]
        powers = {0: self.ring.one()}
        out = self.ring.zero()
        for e, c in self.terms.items():
            k = e[i]
            if k not in powers:
                powers[k] = value**k
            rest = list(e)
            rest[i] = 0
            out = out + powers[k] * CoeffPoly(self.ring, {tuple(rest): c})
        return out

    def coefficient_of(self, name: str, k: int) -> "CoeffPoly":
        """Coefficient of name**k, as a polynomial with that slot zeroed."""
        i = self.ring.index[name]
        out = {}
        for e, c in self.terms.items():
            if e[i] == k:
                rest = list(e)
                rest[i] = 0
                out[tuple(rest)] = c
        return CoeffPoly(self.ring, out)

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        """Numeric evaluation; every symbol with a nonzero exponent must be given."""
        acc = 0j
        for e, c in self.terms.items():
            t = complex(c) if isinstance(c, GaussRat) else complex(c)
            for i, k in enumerate(e):
                if k:
                    t *= values[self.ring.symbols[i]] ** k
            acc += t
        return acc

    # -- dump ----------------------------------------------------------------
    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            cs = c.text() if isinstance(c, GaussRat) else str(c)
            mono = "*".join(
                f"{self.ring.symbols[i]}^{k}" if k > 1 else self.ring.symbols[i]
                for i, k in enumerate(e)
                if k
            )
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append(f"-{mono}")
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"<CoeffPoly {self.text()}>"
