"""Cancellation helpers for FracField elements.

sympy's heuristic gcd recurses over every generator of the ring, even ones a
polynomial does not involve.  Registries accumulate many symbols, so gcds are
computed here in a sub-ring restricted to the variables actually present, with
a shortcut when either side is a single term.
"""
from __future__ import annotations

from functools import lru_cache
from math import gcd

from sympy import ZZ
from sympy.polys.rings import PolyRing


@lru_cache(maxsize=None)
def _subring(symbols):
    return PolyRing(symbols, ZZ)


def _used(f) -> set:
    out = set()
    for m in f.itermonoms():
        out.update(i for i, e in enumerate(m) if e)
    return out


def _monomial_gcd(f, g):
    ring = f.ring
    n = ring.ngens
    mins = None
    c = 0
    for p in (f, g):
        for m, k in p.iterterms():
            mins = list(m) if mins is None else [min(a, b) for a, b in zip(mins, m)]
            c = gcd(c, int(k))
    return ring({tuple(mins or [0] * n): ZZ(c)})


def poly_gcd(f, g):
    """Greatest common divisor with a positive leading coefficient."""
    ring = f.ring
    if not f:
        return g if g.LC > 0 else -g
    if not g:
        return f if f.LC > 0 else -f
    if len(f) == 1 or len(g) == 1:
        return _monomial_gcd(f, g)
    key = (ring, f, g)
    hit = _memo.get(key)
    if hit is not None:
        return hit
    if len(_memo) > 50000:
        _memo.clear()
    _memo[key] = out = _sub_gcd(f, g)
    return out


_memo: dict = {}


def _sub_gcd(f, g):
    ring = f.ring
    used = sorted(_used(f) | _used(g))
    if len(used) == ring.ngens:
        return f.gcd(g)
    sub = _subring(tuple(ring.symbols[i] for i in used))

    def down(p):
        return sub({tuple(m[i] for i in used): k for m, k in p.iterterms()})

    h = down(f).gcd(down(g))
    out = {}
    for m, k in h.iterterms():
        full = [0] * ring.ngens
        for i, e in zip(used, m):
            full[i] = e
        out[tuple(full)] = k
    return ring(out)


def _norm(fld, num, den):
    if den.LC < 0:
        num, den = -num, -den
    return fld.raw_new(num, den)


def cancel(fld, num, den):
    if not num:
        return fld.raw_new(num, fld.ring.one)
    g = poly_gcd(num, den)
    if g != fld.ring.one:
        num = num.exquo(g)
        den = den.exquo(g)
    return _norm(fld, num, den)


def add(a, b, sign=1):
    fld = a.field
    if not b:
        return a
    if not a:
        return -b if sign < 0 else b
    bn = b.numer if sign > 0 else -b.numer
    if a.denom == b.denom:
        return cancel(fld, a.numer + bn, a.denom)
    g = poly_gcd(a.denom, b.denom)
    da, db = a.denom.exquo(g), b.denom.exquo(g)
    return cancel(fld, a.numer * db + bn * da, a.denom * db)


def mul(a, b):
    fld = a.field
    if not a or not b:
        return fld.zero
    g1 = poly_gcd(a.numer, b.denom)
    g2 = poly_gcd(b.numer, a.denom)
    one = fld.ring.one
    an, bd = (a.numer, b.denom) if g1 == one else (a.numer.exquo(g1), b.denom.exquo(g1))
    bn, ad = (b.numer, a.denom) if g2 == one else (b.numer.exquo(g2), a.denom.exquo(g2))
    return _norm(fld, an * bn, ad * bd)


def inv(a):
    if not a:
        raise ZeroDivisionError("division by a zero rational function")
    return _norm(a.field, a.denom, a.numer)
