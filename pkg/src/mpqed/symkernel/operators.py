"""Noncommutative operator expressions.

An :class:`OpExpr` is a sum of :class:`OpTerm` objects.  Each term is a graded
scalar coefficient times an *ordered* product of :class:`Dot`,
:class:`InverseNorm` and :class:`Named` factors, optionally flagged
"+ h.c.".  Factor order is only changed where :func:`commutes` allows it.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping

from .scalars import RatFunc, Registry, RegistryMismatchError, ScalarExpr, default_registry
from .vectors import (
    EMPTY_SUPPORT,
    Support,
    VecExpr,
    _expand_vt,
    _subst_vt,
    as_vec,
    supports_commute,
)

__all__ = [
    "Dot",
    "InverseNorm",
    "Named",
    "OpTerm",
    "OpExpr",
    "commutes",
    "canonicalize",
    "equals",
    "add",
    "multiply",
    "substitute",
    "dot",
    "inv_norm",
    "named",
    "scalar",
    "NAMED_ATOMS",
]

#: named operator atoms and whether they commute with particle operators
NAMED_ATOMS = {"H_f": True, "SelfEnergy": False}


class _Factor:
    __slots__ = ()

    def __eq__(self, other):
        return isinstance(other, _Factor) and self.sort_key == other.sort_key

    def __hash__(self):
        return hash(self.sort_key)

    def __repr__(self):
        return self.sexpr


class Dot(_Factor):
    """Scalar product ``left . right``; symmetric only for commuting arguments."""

    __slots__ = ("left", "right", "__dict__")

    def __init__(self, left, right):
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @cached_property
    def sexpr(self):
        return f"(dot {self.left.sexpr} {self.right.sexpr})"

    @cached_property
    def sort_key(self):
        return (0, self.left.sort_key, self.right.sort_key)

    @cached_property
    def support(self):
        return as_vec(self.left).support | as_vec(self.right).support


class InverseNorm(_Factor):
    """``1/|v|`` for a nonzero vector ``v``."""

    __slots__ = ("arg", "__dict__")

    def __init__(self, arg):
        arg = as_vec(arg)
        if arg.is_zero():
            raise ValueError("InverseNorm of the zero vector")
        object.__setattr__(self, "arg", arg)

    @cached_property
    def sexpr(self):
        return f"(invnorm {self.arg.sexpr})"

    @cached_property
    def sort_key(self):
        return (1, self.arg.key, ())

    @cached_property
    def support(self):
        return self.arg.support


class Named(_Factor):
    """Opaque operator atom such as the free-field energy ``H_f``."""

    __slots__ = ("name", "__dict__")

    def __init__(self, name: str):
        if name not in NAMED_ATOMS:
            raise ValueError(f"unknown named atom {name!r}; known: {sorted(NAMED_ATOMS)}")
        object.__setattr__(self, "name", name)

    @cached_property
    def sexpr(self):
        return f"(named {self.name})"

    @cached_property
    def sort_key(self):
        return (2, self.name, ())

    @cached_property
    def support(self):
        return Support(named=frozenset({self.name}))


def commutes(x, y) -> bool:
    """True only for provably commuting factors (or vector terms)."""
    return supports_commute(_support(x), _support(y))


def _support(x):
    if isinstance(x, (RatFunc, ScalarExpr, int, Fraction)):
        return EMPTY_SUPPORT
    return x.support


class OpTerm:
    """``coef * f1 f2 ... fk`` (plus its adjoint when ``herm`` is set)."""

    __slots__ = ("coef", "factors", "herm", "__dict__")

    def __init__(self, coef: ScalarExpr, factors: Iterable = (), herm: bool = False):
        self.coef = coef
        self.factors = tuple(factors)
        self.herm = bool(herm)

    @cached_property
    def shape_key(self):
        return (tuple(f.sort_key for f in self.factors), self.herm)

    def __repr__(self):
        return f"OpTerm({self.coef}, {list(self.factors)}, herm={self.herm})"


def _expand_factor(f, reg):
    """Canonical expansion of one factor: list of ``(RatFunc, factor)``."""
    if isinstance(f, Dot):
        out = []
        for ca, a in _expand_vt(f.left, reg):
            for cb, b in _expand_vt(f.right, reg):
                if supports_commute(a.support, b.support) and b.sort_key < a.sort_key:
                    a2, b2 = b, a
                else:
                    a2, b2 = a, b
                out.append((ca * cb, Dot(a2, b2)))
        return out
    if isinstance(f, InverseNorm):
        arg = f.arg
        if arg.registry is not reg and arg.terms:
            raise RegistryMismatchError("InverseNorm argument from a different registry")
        _, v = arg.sign_normalized()
        return [(reg.one(), InverseNorm(v))]
    if isinstance(f, Named):
        return [(reg.one(), f)]
    raise TypeError(f"not an operator factor: {f!r}")


def _normal_order(factors):
    """Lexicographic normal form of a word in a partially commutative monoid.

    At every step the smallest factor that commutes with everything in front
    of it is moved to the front.  The result depends only on the equivalence
    class of the word, so canonicalization is idempotent and insensitive to
    permutations of commuting blocks.
    """
    rest = list(factors)
    out = []
    while rest:
        best = None
        for i, f in enumerate(rest):
            if all(supports_commute(f.support, g.support) for g in rest[:i]):
                if best is None or f.sort_key < rest[best].sort_key:
                    best = i
        out.append(rest.pop(best))
    return tuple(out)


class OpExpr:
    """Sum of operator terms.  Instances returned by the public API are canonical."""

    __slots__ = ("registry", "terms", "canonical", "__dict__")

    def __init__(self, registry: Registry | None = None, terms: Iterable[OpTerm] = (),
                 canonical: bool = False):
        self.registry = registry or default_registry()
        self.terms = tuple(terms)
        self.canonical = canonical
        for t in self.terms:
            if t.coef.registry is not self.registry:
                raise RegistryMismatchError("term coefficient from a different registry")

    # -- construction ----------------------------------------------------------
    @classmethod
    def zero(cls, registry=None):
        return cls(registry, (), canonical=True)

    @classmethod
    def one(cls, registry=None):
        reg = registry or default_registry()
        return cls(reg, [OpTerm(ScalarExpr(reg, {0: reg.one()}))], canonical=True)

    def is_zero(self):
        return not canonicalize(self).terms

    # -- algebra -----------------------------------------------------------------
    def __add__(self, other):
        other = _as_op(other, self.registry)
        if other is None:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return OpExpr(self.registry, [OpTerm(-t.coef, t.factors, t.herm) for t in self.terms],
                      canonical=self.canonical)

    def __sub__(self, other):
        other = _as_op(other, self.registry)
        if other is None:
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        other = _as_op(other, self.registry)
        if other is None:
            return NotImplemented
        return add(other, -self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RatFunc, ScalarExpr)):
            return self.scale(other)
        other = _as_op(other, self.registry)
        if other is None:
            return NotImplemented
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, RatFunc, ScalarExpr)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c, grade=0):
        c = _as_scalar(c, self.registry).shift(grade)
        return canonicalize(OpExpr(self.registry, [OpTerm(t.coef * c, t.factors, t.herm)
                                                    for t in self.terms]))

    def shift(self, dg):
        return OpExpr(self.registry, [OpTerm(t.coef.shift(dg), t.factors, t.herm)
                                      for t in self.terms], canonical=self.canonical)

    def map_coeffs(self, fn):
        """Apply ``fn`` to every coefficient RatFunc (grade preserved)."""
        return canonicalize(OpExpr(self.registry, [OpTerm(t.coef.map(fn), t.factors, t.herm)
                                                    for t in self.terms]))

    # -- grading -------------------------------------------------------------
    def grades(self):
        gs = set()
        for t in canonicalize(self).terms:
            gs.update(t.coef.grades())
        return sorted(gs)

    def grade(self, n):
        """The grade-``n`` component (as an OpExpr still carrying grade ``n``)."""
        out = []
        for t in canonicalize(self).terms:
            c = t.coef.at(n)
            if not c.is_zero():
                out.append(OpTerm(ScalarExpr(self.registry, {n: c}), t.factors, t.herm))
        return OpExpr(self.registry, out, canonical=True)

    def by_grade(self):
        return {g: self.grade(g) for g in self.grades()}

    def truncate(self, max_grade):
        parts = [self.grade(g) for g in self.grades() if g <= max_grade]
        return sum(parts, OpExpr.zero(self.registry))

    # -- inspection ------------------------------------------------------------
    @cached_property
    def key(self):
        c = canonicalize(self)
        return tuple((t.shape_key, t.coef.key) for t in c.terms)

    def __eq__(self, other):
        if not isinstance(other, OpExpr):
            return NotImplemented
        return equals(self, other)

    def __hash__(self):
        return hash(self.key)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self):
        from .serialize import dumps
        return dumps(self)

    def hermitian_terms(self):
        return [t for t in self.terms if t.herm]

    def subs(self, mapping):
        return substitute(self, mapping)


def _as_scalar(c, reg):
    if isinstance(c, ScalarExpr):
        if c.registry is not reg:
            raise RegistryMismatchError("scalar from a different registry")
        return c
    if isinstance(c, RatFunc):
        if c.registry is not reg:
            raise RegistryMismatchError("scalar from a different registry")
        return ScalarExpr(reg, {0: c})
    if isinstance(c, str):
        return ScalarExpr(reg, {0: reg.parse(c)})
    return ScalarExpr(reg, {0: reg.const(c)})


def _as_op(x, reg):
    if isinstance(x, OpExpr):
        return x
    if isinstance(x, (int, Fraction, RatFunc, ScalarExpr)):
        c = _as_scalar(x, reg)
        return OpExpr(reg, [OpTerm(c)])
    return None


def canonicalize(e: OpExpr) -> OpExpr:
    """Multilinear expansion, commuting-factor sorting and term merging."""
    if e.canonical:
        return e
    reg = e.registry
    acc: dict = {}
    for t in e.terms:
        if t.coef.is_zero():
            continue
        options = [_expand_factor(f, reg) for f in t.factors]
        for combo in product(*options):
            c = reg.one()
            facs = []
            for ci, fi in combo:
                c = c * ci
                facs.append(fi)
            if c.is_zero():
                continue
            facs = _normal_order(facs)
            key = (tuple(f.sort_key for f in facs), t.herm)
            coef = t.coef * c
            if key in acc:
                acc[key] = (acc[key][0] + coef, facs)
            else:
                acc[key] = (coef, facs)
    terms = [OpTerm(c, facs, key[1]) for key, (c, facs) in sorted(acc.items(), key=lambda kv: kv[0])
             if not c.is_zero()]
    return OpExpr(reg, terms, canonical=True)


def equals(a: OpExpr, b: OpExpr) -> bool:
    if a.registry is not b.registry:
        raise RegistryMismatchError("cannot compare expressions from different registries")
    return a.key == b.key


def add(a: OpExpr, b: OpExpr) -> OpExpr:
    if a.registry is not b.registry:
        raise RegistryMismatchError("cannot add expressions from different registries")
    return canonicalize(OpExpr(a.registry, a.terms + b.terms))


def _distribute(a: OpExpr, b: OpExpr):
    """All ordered products of the terms of ``a`` and ``b`` (no canonicalization)."""
    if a.registry is not b.registry:
        raise RegistryMismatchError("cannot multiply expressions from different registries")
    out = []
    for s in a.terms:
        for t in b.terms:
            if (s.herm and t.factors) or (t.herm and s.factors):
                raise ValueError("products involving '+ h.c.' terms are not representable")
            out.append(OpTerm(s.coef * t.coef, s.factors + t.factors, s.herm or t.herm))
    return out


def multiply(a: OpExpr, b: OpExpr) -> OpExpr:
    return canonicalize(OpExpr(a.registry, _distribute(a, b)))


def _subst_factor(f, mapping, reg):
    if isinstance(f, Dot):
        return Dot(_subst_vt_any(f.left, mapping, reg), _subst_vt_any(f.right, mapping, reg))
    if isinstance(f, InverseNorm):
        v = f.arg.subs(mapping)
        if v.is_zero():
            raise ValueError(f"substitution maps {f.arg.sexpr} to zero inside 1/|.|")
        return InverseNorm(v)
    return f


def _subst_vt_any(x, mapping, reg):
    if isinstance(x, VecExpr):
        return x.subs(mapping)
    return _subst_vt(x, mapping, reg)


def substitute(e: OpExpr, mapping: Mapping) -> OpExpr:
    """Apply a linear substitution ``atom -> VecExpr`` everywhere, then canonicalize."""
    reg = e.registry
    for k, v in mapping.items():
        if isinstance(v, VecExpr) and v.terms and v.registry is not reg:
            raise RegistryMismatchError(
                f"substitution image for {k.sexpr} uses a different symbol registry")
    terms = [OpTerm(t.coef, [_subst_factor(f, mapping, reg) for f in t.factors], t.herm)
             for t in e.terms]
    return canonicalize(OpExpr(reg, terms))


# -- convenience constructors ------------------------------------------------------------
def scalar(c, grade=0, registry=None) -> OpExpr:
    reg = registry or (c.registry if isinstance(c, (RatFunc, ScalarExpr)) else default_registry())
    return canonicalize(OpExpr(reg, [OpTerm(_as_scalar(c, reg).shift(grade))]))


def _reg_of(*things, registry=None):
    if registry is not None:
        return registry
    for x in things:
        if isinstance(x, (VecExpr, RatFunc, ScalarExpr)):
            return x.registry
    return default_registry()


def dot(u, v, coef=1, grade=0, herm=False, registry=None) -> OpExpr:
    reg = _reg_of(coef, u, v, registry=registry)
    return canonicalize(OpExpr(reg, [OpTerm(_as_scalar(coef, reg).shift(grade),
                                            [Dot(u, v)], herm)]))


def inv_norm(v, coef=1, grade=0, registry=None) -> OpExpr:
    reg = _reg_of(coef, v, registry=registry)
    return canonicalize(OpExpr(reg, [OpTerm(_as_scalar(coef, reg).shift(grade),
                                            [InverseNorm(as_vec(v, reg))])]))


def named(name, coef=1, grade=0, registry=None) -> OpExpr:
    reg = _reg_of(coef, registry=registry)
    return canonicalize(OpExpr(reg, [OpTerm(_as_scalar(coef, reg).shift(grade), [Named(name)])]))


def term(coef, factors, grade=0, herm=False, registry=None) -> OpExpr:
    """Single product term ``coef * factors[0] factors[1] ...``."""
    reg = _reg_of(coef, registry=registry)
    return canonicalize(OpExpr(reg, [OpTerm(_as_scalar(coef, reg).shift(grade),
                                            list(factors), herm)]))
