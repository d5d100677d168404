"""Normal-ordering engine for polynomial differential operators.

A term is ``(zexp, dexp) -> CoeffPoly`` with ``zexp``/``dexp`` integer
exponent tuples over a shared list of variable pairs (z_i, d_i) obeying
[d_i, z_i] = 1, all distinct pairs commuting.  Products are rewritten to
normal form (all z's left of all d's) through the exact identity

    d^a z^b = sum_j  j! C(a,j) C(b,j)  z^(b-j) d^(a-j).

This module is the hot path of every symbolic identity suite; it keeps a
plain functional interface so a compiled twin can replace it wholesale.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import comb, factorial

__all__ = ["mul_terms", "add_terms", "scale_terms", "apply_terms", "WeylResourceError"]


class WeylResourceError(RuntimeError):
    """Raised when an intermediate product exceeds the term cap."""


@lru_cache(maxsize=1 << 14)
def _pair_weights(a: int, b: int) -> tuple:
    # weights of d^a z^b reordering: (j, j! C(a,j) C(b,j)) for j=0..min(a,b)
    return tuple((j, factorial(j) * comb(a, j) * comb(b, j)) for j in range(min(a, b) + 1))


@lru_cache(maxsize=1 << 16)
def _reorder(dexp: tuple, zexp: tuple) -> tuple:
    """Expansion of d^dexp * z^zexp into normal-ordered terms.

    Returns a tuple of (znew, dnew, integer weight).
    """
    support = [i for i, (a, b) in enumerate(zip(dexp, zexp)) if a and b]
    if not support:
        return ((zexp, dexp, 1),)
    choices = [_pair_weights(dexp[i], zexp[i]) for i in support]
    out = []
    for combo in product(*choices):
        znew = list(zexp)
        dnew = list(dexp)
        w = 1
        for i, (j, wj) in zip(support, combo):
            znew[i] -= j
            dnew[i] -= j
            w *= wj
        out.append((tuple(znew), tuple(dnew), w))
    return tuple(out)


def add_terms(aterms: dict, bterms: dict) -> dict:
    out = dict(aterms)
    for key, c in bterms.items():
        s = out.get(key)
        if s is None:
            out[key] = c
        else:
            s = s + c
            if s.is_zero():
                del out[key]
            else:
                out[key] = s
    return out


def scale_terms(aterms: dict, c) -> dict:
    out = {}
    for key, p in aterms.items():
        q = p * c
        if not q.is_zero():
            out[key] = q
    return out


def mul_terms(aterms: dict, bterms: dict, cap: int = 10**7) -> dict:
    """Normal-ordered product.  ``cap`` bounds the accumulated term count."""
    out: dict = {}
    for (z1, d1), c1 in aterms.items():
        for (z2, d2), c2 in bterms.items():
            c = c1 * c2
            if c.is_zero():
                continue
            for zm, dm, w in _reorder(d1, z2):
                key = (
                    tuple(x + y for x, y in zip(z1, zm)),
                    tuple(x + y for x, y in zip(dm, d2)),
                )
                cw = c * w if w != 1 else c
                s = out.get(key)
                if s is None:
                    out[key] = cw
                    if len(out) > cap:
                        raise WeylResourceError(
                            f"normal-ordered product exceeded cap of {cap} terms"
                        )
                else:
                    s = s + cw
                    if s.is_zero():
                        del out[key]
                    else:
                        out[key] = s
    return out


def apply_terms(aterms: dict, pterms: dict) -> dict:
    """Act with the operator on a polynomial (terms with empty d-part).

    d^a applied to z^g gives falling(g, a) z^(g-a); anything with g < a
    componentwise annihilates.
    """
    out: dict = {}
    for (z1, d1), c1 in aterms.items():
        for (zg, dg), c2 in pterms.items():
            if any(dg):
                raise ValueError("apply target must be a plain polynomial")
            w = 1
            newz = list(zg)
            ok = True
            for i, a in enumerate(d1):
                if not a:
                    continue
                g = zg[i]
                if g < a:
                    ok = False
                    break
                for t in range(a):
                    w *= g - t
                newz[i] = g - a
            if not ok or w == 0:
                continue
            key = (tuple(x + y for x, y in zip(z1, newz)), dg)
            c = c1 * c2 * w
            s = out.get(key)
            if s is None:
                out[key] = c
            else:
                s = s + c
                if s.is_zero():
                    del out[key]
                else:
                    out[key] = s
    return out
