"""Double indices, representation parameters and Gelfand-Tsetlin schemes.

A double index is a pair (a, abar) of independent complex numbers with
a - abar an integer; double powers z**(a, abar) are then single valued.
Schemes are stored in the integer/real parametrization

    lam_lj = (m_lj + kappa - n + l + i*mu_lj) / 2,
    lambar_lj = (-m_lj + kappa - n + l + i*mu_lj) / 2,      l = 1..n-1,

with the top row given by the representation weights sigma_j.  The
``mu_lj`` slots may hold complex values: a unit shift of one sector only
(lam_ri -> lam_ri + 1 with lambar_ri fixed) is (m_ri, mu_ri) ->
(m_ri + 1, mu_ri - i), which keeps the parametrization exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "DoubleIndex",
    "ReprParams",
    "GTScheme",
    "SchemeShift",
    "make_scheme",
    "shift_scheme",
    "eigenvalue_poly",
    "rho",
    "scheme_to_json",
    "scheme_from_json",
]

INT_TOL = 1e-12


@dataclass(frozen=True)
class DoubleIndex:
    """Element (a, abar) of the index lattice: a - abar must be an integer."""

    hol: complex
    anti: complex

    def __post_init__(self):
        d = self.hol - self.anti
        if abs(d.imag) > INT_TOL or abs(d.real - round(d.real)) > INT_TOL:
            raise ValueError(f"hol - anti = {d} is not an integer")

    @property
    def winding(self) -> int:
        """The integer a - abar (exact rounding)."""
        return round((self.hol - self.anti).real)

    @property
    def weight(self) -> complex:
        """The sum a + abar."""
        return self.hol + self.anti

    def __add__(self, other):
        if isinstance(other, DoubleIndex):
            return DoubleIndex(self.hol + other.hol, self.anti + other.anti)
        if isinstance(other, (int, float)):
            return DoubleIndex(self.hol + other, self.anti + other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return DoubleIndex(-self.hol, -self.anti)

    def __sub__(self, other):
        if isinstance(other, DoubleIndex):
            return DoubleIndex(self.hol - other.hol, self.anti - other.anti)
        if isinstance(other, (int, float)):
            return DoubleIndex(self.hol - other, self.anti - other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        if isinstance(k, int):
            return DoubleIndex(k * self.hol, k * self.anti)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"DoubleIndex({self.hol:.6g}, {self.anti:.6g})"


E_HOL = DoubleIndex(1, 0)
E_ANTI = DoubleIndex(0, 1)
ONE = DoubleIndex(1, 1)


@dataclass(frozen=True)
class ReprParams:
    """Unitary principal series weights sigma_j = (s_j + kappa + i eta_j)/2."""

    n: int
    s: tuple
    kappa: float
    eta: tuple

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("rank must be at least 2")
        if len(self.s) != self.n or len(self.eta) != self.n:
            raise ValueError("s and eta must have length n")
        if not all(isinstance(k, int) for k in self.s):
            raise ValueError("s entries must be integers")
        object.__setattr__(self, "s", tuple(self.s))
        object.__setattr__(self, "eta", tuple(float(x) for x in self.eta))

    def sigma(self, j: int) -> DoubleIndex:
        """sigma_j as a double index, 1-based."""
        sj, etaj = self.s[j - 1], self.eta[j - 1]
        return DoubleIndex(
            (sj + self.kappa + 1j * etaj) / 2, (-sj + self.kappa + 1j * etaj) / 2
        )

    def sigmas(self) -> list:
        return [self.sigma(j) for j in range(1, self.n + 1)]

    def drop_first(self) -> "ReprParams":
        """Parameters of the embedded rank n-1 representation (sigma_2..sigma_n)."""
        return ReprParams(self.n - 1, self.s[1:], self.kappa, self.eta[1:])


@dataclass(frozen=True)
class SchemeShift:
    """Unit shift of one scheme entry in one sector."""

    level: int
    pos: int
    direction: int
    sector: str = "hol"

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if self.sector not in ("hol", "anti"):
            raise ValueError("sector must be 'hol' or 'anti'")
        if not 1 <= self.pos <= self.level:
            raise ValueError("need 1 <= pos <= level")


class GTScheme:
    """Paired triangular arrays indexing one basis eigenfunction.

    ``ints[l-1]`` / ``reals[l-1]`` hold the level-l parametrization data,
    l = 1..n-1; the top row (level n) is fixed by ``params``.
    """

    def __init__(self, params: ReprParams, ints: Sequence[Sequence[int]], reals: Sequence[Sequence[complex]]):
        n = params.n
        if len(ints) != n - 1 or len(reals) != n - 1:
            raise ValueError(f"need {n - 1} levels below the top row")
        for l, (mi, mr) in enumerate(zip(ints, reals), start=1):
            if len(mi) != l or len(mr) != l:
                raise ValueError(f"level {l} must have {l} entries")
            if not all(isinstance(m, int) for m in mi):
                raise ValueError("integer slots must hold integers")
        self.params = params
        self.n = n
        self.ints = tuple(tuple(level) for level in ints)
        self.reals = tuple(tuple(complex(x) for x in level) for level in reals)

    # -- values ---------------------------------------------------------------
    def value(self, l: int, j: int) -> DoubleIndex:
        """lam_lj as a double index; level n returns sigma_j (1-based)."""
        if l == self.n:
            return self.params.sigma(j)
        m = self.ints[l - 1][j - 1]
        mu = self.reals[l - 1][j - 1]
        c = self.params.kappa - self.n + l
        return DoubleIndex((m + c + 1j * mu) / 2, (-m + c + 1j * mu) / 2)

    def level(self, l: int) -> list:
        return [self.value(l, j) for j in range(1, l + 1)]

    def level_sum(self, l: int) -> DoubleIndex:
        vals = self.level(l)
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        return out

    def int_sum(self, l: int) -> int:
        """Sum of the integer parts m_lj = lam_lj - lambar_lj at level l (exact)."""
        if l == self.n:
            return sum(self.params.s)
        return sum(self.ints[l - 1])

    def is_degenerate(self) -> bool:
        """True if some level repeats an entry exactly (coinciding roots)."""
        for l in range(1, self.n):
            seen = set()
            for m, mu in zip(self.ints[l - 1], self.reals[l - 1]):
                key = (m, mu)
                if key in seen:
                    return True
                seen.add(key)
        return False

    def replace_level(self, l: int, ints: Sequence[int], reals: Sequence[complex]) -> "GTScheme":
        ni = [list(x) for x in self.ints]
        nr = [list(x) for x in self.reals]
        ni[l - 1] = list(ints)
        nr[l - 1] = list(reals)
        return GTScheme(self.params, ni, nr)

    def eps_shifted(self, l: int, eps: float) -> "GTScheme":
        """Add (eps/2, eps/2) to every level-l entry (contour regulator)."""
        ints = self.ints[l - 1]
        reals = [mu - 1j * eps for mu in self.reals[l - 1]]
        return self.replace_level(l, ints, reals)

    def __eq__(self, other):
        return (
            isinstance(other, GTScheme)
            and self.params == other.params
            and self.ints == other.ints
            and self.reals == other.reals
        )

    def __repr__(self):
        return f"GTScheme(n={self.n}, ints={self.ints}, reals={self.reals})"


def make_scheme(n: int, ints, reals, params: ReprParams) -> GTScheme:
    """Assemble a scheme from its triangles; top row comes from ``params``."""
    if params.n != n:
        raise ValueError("params rank does not match n")
    return GTScheme(params, ints, reals)


def shift_scheme(s: GTScheme, sh: SchemeShift) -> GTScheme:
    """Shift one entry by +-1 in one sector; the top row is immutable."""
    if sh.level >= s.n:
        raise ValueError("cannot shift the top row")
    m = list(s.ints[sh.level - 1])
    mu = list(s.reals[sh.level - 1])
    j = sh.pos - 1
    if sh.sector == "hol":
        m[j] += sh.direction
        mu[j] -= 1j * sh.direction
    else:
        m[j] -= sh.direction
        mu[j] -= 1j * sh.direction
    return s.replace_level(sh.level, m, mu)


def eigenvalue_poly(s: GTScheme, m: int, sector: str = "hol") -> list:
    """Roots of the (monic) level-m eigenvalue polynomial."""
    if not 1 <= m <= s.n:
        raise ValueError("level out of range")
    vals = s.level(m)
    if sector == "hol":
        return [v.hol for v in vals]
    if sector == "anti":
        return [v.anti for v in vals]
    raise ValueError("sector must be 'hol' or 'anti'")


def rho(s: GTScheme) -> float:
    """Orthogonality weight: product over levels of squared norm differences.

    For lattice schemes this equals prod ((dm)^2 + (dmu)^2)/4 over pairs,
    real and nonnegative, vanishing iff a level degenerates.
    """
    out = 1 + 0j
    for r in range(1, s.n):
        vals = s.level(r)
        for a in range(len(vals)):
            for b in range(a + 1, len(vals)):
                d = vals[a] - vals[b]
                out *= -(d.hol * d.anti)
    if abs(out.imag) < 1e-10 * max(1.0, abs(out.real)):
        return out.real
    return out  # complex mu slots: caller interprets


# -- JSON interface -----------------------------------------------------------


def scheme_to_json(s: GTScheme) -> str:
    for level in s.reals:
        if any(abs(complex(x).imag) > 0 for x in level):
            raise ValueError("only lattice schemes (real slots) serialize to JSON")
    doc = {
        "n": s.n,
        "kappa": s.params.kappa,
        "sigma": {"s": list(s.params.s), "eta": list(s.params.eta)},
        "levels": [
            {"ints": list(s.ints[l]), "reals": [complex(x).real for x in s.reals[l]]}
            for l in range(s.n - 1)
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def scheme_from_json(text: str) -> GTScheme:
    doc = json.loads(text)
    n = doc["n"]
    params = ReprParams(
        n, tuple(int(k) for k in doc["sigma"]["s"]), float(doc["kappa"]), tuple(doc["sigma"]["eta"])
    )
    ints = [lev["ints"] for lev in doc["levels"]]
    reals = [lev["reals"] for lev in doc["levels"]]
    return make_scheme(n, ints, reals, params)
