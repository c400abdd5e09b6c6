"""Vector atoms, cross products and linear combinations.

Everything is index-free: a vector is a linear combination of *vector terms*,
and a vector term is either an atom or a binary cross product.  Field atoms
carry an evaluation point and a multiset of directional derivatives
``(X . grad)``; the point is the argument of a nonlinear function and is never
expanded, while the derivative directions are linear and are.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import factorial
from typing import Iterable

from .scalars import RatFunc, Registry, RegistryMismatchError, default_registry

__all__ = [
    "FRAMES",
    "FIELD_KINDS",
    "Pos",
    "Mom",
    "Spin",
    "Moment",
    "FieldAtom",
    "Cross",
    "VecExpr",
    "Support",

    "supports_commute",
    "vt_commute",
    "as_vec",
]

FRAMES = ("lab", "jac")
FIELD_KINDS = ("E", "B", "A", "Pi")
_FIELD_RANK = {k: i for i, k in enumerate(FIELD_KINDS)}


@dataclass(frozen=True)
class Support:
    """Which degrees of freedom a term touches (used by the commutation test)."""

    pos: frozenset = frozenset()
    mom: frozenset = frozenset()
    spins: frozenset = frozenset()
    fields: bool = False
    named: frozenset = frozenset()

    def __or__(self, other):
        return Support(self.pos | other.pos, self.mom | other.mom,
                       self.spins | other.spins, self.fields or other.fields,
                       self.named | other.named)

    def is_empty(self):
        return not (self.pos or self.mom or self.spins or self.fields or self.named)


EMPTY_SUPPORT = Support()


def supports_commute(a: Support, b: Support) -> bool:
    """Conservative commutation test: ``False`` unless provably commuting."""
    if a.is_empty() or b.is_empty():
        return True
    if a.fields and b.fields:
        return False
    for x, y in ((a, b), (b, a)):
        if "H_f" in x.named and y.fields:
            return False
        if any(n != "H_f" for n in x.named):
            # opaque named atoms commute with nothing but scalars
            return False
        for frame, i in x.mom:
            for f2, j in y.pos:
                if f2 != frame or i == j:
                    return False
    if a.spins & b.spins:
        return False
    return True


class _VecTerm:
    """Base for vector terms.  Subclasses are immutable."""

    __slots__ = ()

    def __eq__(self, other):
        return isinstance(other, _VecTerm) and self.sort_key == other.sort_key

    def __hash__(self):
        return hash(self.sort_key)

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __repr__(self):
        return self.sexpr


class _IndexedAtom(_VecTerm):
    _tag = ""
    _rank = 0

    __slots__ = ("index", "frame", "__dict__")

    def __init__(self, index: int, frame: str = "lab"):
        if frame not in FRAMES:
            raise ValueError(f"unknown frame {frame!r}")
        if not isinstance(index, int) or index < 1:
            raise ValueError(f"atom index must be a positive integer, got {index!r}")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "frame", frame)

    @cached_property
    def sort_key(self):
        return (self._rank, FRAMES.index(self.frame), self.index, "")

    @cached_property
    def sexpr(self):
        return f"({self._tag} {self.frame} {self.index})"


class Pos(_IndexedAtom):
    """Position ``r_a`` (lab frame) or Jacobi vector ``R_a``."""

    _tag = "pos"
    _rank = 1

    @cached_property
    def support(self):
        return Support(pos=frozenset({(self.frame, self.index)}))


class Mom(_IndexedAtom):
    """Momentum ``p_a`` (lab) or ``P_a`` (Jacobi)."""

    _tag = "mom"
    _rank = 0

    @cached_property
    def support(self):
        return Support(mom=frozenset({(self.frame, self.index)}))


class _SpinLike(_VecTerm):
    _tag = ""
    _rank = 0

    __slots__ = ("index", "__dict__")

    def __init__(self, index: int):
        if not isinstance(index, int) or index < 1:
            raise ValueError(f"atom index must be a positive integer, got {index!r}")
        object.__setattr__(self, "index", index)

    @cached_property
    def sort_key(self):
        return (self._rank, 0, self.index, "")

    @cached_property
    def sexpr(self):
        return f"({self._tag} {self.index})"

    @cached_property
    def support(self):
        return Support(spins=frozenset({self.index}))

    frame = None


class Spin(_SpinLike):
    _tag = "spin"
    _rank = 2


class Moment(_SpinLike):
    """Magnetic moment ``g_a e_a S_a / 2 m_a`` of particle ``a`` (kept atomic)."""

    _tag = "moment"
    _rank = 3


class FieldAtom(_VecTerm):
    """Field operator ``(X1.grad)...(Xk.grad) F(r)`` evaluated at ``mu**scale * point``.

    ``dirs`` is a tuple of ``(VecExpr, multiplicity)`` pairs.  In canonical
    form every direction is a single unit-coefficient term and the tuple is
    sorted; use :meth:`expand` to reach it.  The ``1/n!`` weights of a Taylor
    series belong to the enclosing coefficient, not to the atom.
    """

    __slots__ = ("kind", "point", "scale", "dirs", "__dict__")

    def __init__(self, kind: str, point, scale: int = 0, dirs: Iterable = ()):
        if kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {kind!r}")
        point = as_vec(point)
        if point.is_zero():
            # F(0) is legitimate, keep the registry of whatever came along
            pass
        if point.support.fields:
            raise ValueError("field evaluation point cannot contain field atoms")
        clean = []
        for d in dirs:
            if isinstance(d, tuple):
                x, n = d
            else:
                x, n = d, 1
            x = as_vec(x)
            if x.support.fields:
                raise ValueError("derivative directions cannot contain field atoms")
            if x.support.spins:
                raise ValueError("spin and moment atoms never appear in derivative directions")
            if n < 0:
                raise ValueError("negative derivative multiplicity")
            if n:
                clean.append((x, int(n)))
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "scale", int(scale))
        object.__setattr__(self, "dirs", tuple(clean))

    @cached_property
    def order(self):
        return sum(n for _, n in self.dirs)

    @cached_property
    def is_canonical(self):
        if self.kind == "Pi":
            return False
        prev = None
        for x, n in self.dirs:
            if len(x.terms) != 1:
                return False
            t, c = x.terms[0]
            if c != 1 or not t.is_canonical_term():
                return False
            if prev is not None and not prev.sort_key < t.sort_key:
                return False
            prev = t
        return True

    def is_canonical_term(self):
        return self.is_canonical

    @cached_property
    def dir_terms(self):
        """Canonical directions as a flat sorted tuple with repetitions."""
        out = []
        for x, n in self.dirs:
            out.extend([x.terms[0][0]] * n)
        return tuple(out)

    def with_dirs(self, dirs):
        return FieldAtom(self.kind, self.point, self.scale, dirs)

    def with_point(self, point, scale=None):
        return FieldAtom(self.kind, point, self.scale if scale is None else scale, self.dirs)

    @cached_property
    def sexpr(self):
        ds = " ".join(
            " ".join([x.terms[0][0].sexpr if (len(x.terms) == 1 and x.terms[0][1] == 1) else x.sexpr] * n)
            for x, n in self.dirs)
        return f"(field {self.kind} {self.point.sexpr} {self.scale} (dirs{' ' + ds if ds else ''}))"

    @cached_property
    def sort_key(self):
        return (4, _FIELD_RANK[self.kind], self.order, self.sexpr)

    @cached_property
    def support(self):
        s = Support(fields=True) | self.point.support
        for x, _ in self.dirs:
            s = s | x.support
        return s

    def expand(self, registry):
        """Canonical expansion as ``[(coeff, FieldAtom)]``."""
        coeff = registry.one()
        kind = self.kind
        if kind == "Pi":
            # Pi = -eps0 E
            coeff = -registry.rf("eps0")
            kind = "E"
        # multinomial expansion of each (X.grad)^n, then merge the multisets
        pieces: list[list[tuple[RatFunc, tuple]]] = [[(coeff, ())]]
        for x, n in self.dirs:
            pieces.append(_power_multisets(x, n, registry))
        out: dict[tuple, RatFunc] = {}
        for combo in product(*pieces):
            c = registry.one()
            ms: list = []
            for ci, mi in combo:
                c = c * ci
                ms.extend(mi)
            if c.is_zero():
                continue
            key = tuple(sorted(ms, key=lambda t: t.sort_key))
            out[key] = out[key] + c if key in out else c
        res = []
        for ms, c in out.items():
            if c.is_zero():
                continue
            grouped: list[tuple[VecExpr, int]] = []
            for t in ms:
                if grouped and grouped[-1][0].terms[0][0] == t:
                    grouped[-1] = (grouped[-1][0], grouped[-1][1] + 1)
                else:
                    grouped.append((VecExpr.atom(t, registry), 1))
            res.append((c, FieldAtom(kind, self.point, self.scale, grouped)))
        return res


def _power_multisets(x: "VecExpr", n: int, registry):
    """``(sum c_i V_i)^n`` for commuting symbols ``V_i`` as multisets."""
    terms = x.terms
    out = []
    k = len(terms)
    if k == 0:
        return [] if n else [(registry.one(), ())]

    def comps(total, parts):
        if parts == 1:
            yield (total,)
            return
        for i in range(total, -1, -1):
            for rest in comps(total - i, parts - 1):
                yield (i,) + rest

    for ks in comps(n, k):
        c = registry.const(Fraction(factorial(n)))
        ms = []
        for (t, ci), ki in zip(terms, ks):
            if ki:
                c = c * ci ** ki / factorial(ki)
                ms.extend([t] * ki)
        out.append((c, tuple(ms)))
    return out


class Cross(_VecTerm):
    """Binary, non-associative cross product of two vector terms."""

    __slots__ = ("left", "right", "__dict__")

    def __init__(self, left, right):
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @cached_property
    def sexpr(self):
        return f"(cross {_sx(self.left)} {_sx(self.right)})"

    @cached_property
    def sort_key(self):
        return (5, 0, 0, self.sexpr)

    @cached_property
    def support(self):
        return as_vec(self.left).support | as_vec(self.right).support

    def is_canonical_term(self):
        return (isinstance(self.left, _VecTerm) and isinstance(self.right, _VecTerm)
                and self.left.is_canonical_term() and self.right.is_canonical_term())


def _sx(x):
    return x.sexpr


# atoms are always canonical
for _cls in (Pos, Mom, Spin, Moment):
    _cls.is_canonical_term = lambda self: True


def vt_commute(a, b) -> bool:
    return supports_commute(a.support, b.support)


def _is_vt(x):
    return isinstance(x, _VecTerm)


def as_vec(x, registry=None) -> "VecExpr":
    if isinstance(x, VecExpr):
        return x
    if _is_vt(x):
        return VecExpr.atom(x, registry)
    raise TypeError(f"cannot interpret {x!r} as a vector")


class VecExpr:
    """Canonical linear combination of vector terms with RatFunc coefficients."""

    __slots__ = ("registry", "terms", "__dict__")

    def __init__(self, registry: Registry | None, items=()):
        reg = registry
        acc: dict = {}
        order = []
        for t, c in items:
            if isinstance(c, (int, Fraction)):
                reg = reg or default_registry()
                c = reg.const(c)
            if reg is None:
                reg = c.registry
            elif c.registry is not reg:
                raise RegistryMismatchError("vector coefficients from different registries")
            if c.is_zero():
                continue
            for c2, t2 in _expand_vt(t, reg):
                cc = c * c2
                if t2 in acc:
                    acc[t2] = acc[t2] + cc
                else:
                    acc[t2] = cc
                    order.append(t2)
        self.registry = reg or default_registry()
        self.terms = tuple(sorted(((t, c) for t, c in acc.items() if not c.is_zero()),
                                  key=lambda tc: tc[0].sort_key))

    @classmethod
    def atom(cls, t, registry=None):
        reg = registry or default_registry()
        obj = cls.__new__(cls)
        if t.is_canonical_term():
            obj.registry = reg
            obj.terms = ((t, reg.one()),)
            return obj
        return cls(reg, [(t, reg.one())])

    @classmethod
    def zero(cls, registry=None):
        return cls(registry or default_registry(), ())

    def is_zero(self):
        return not self.terms

    @cached_property
    def sexpr(self):
        inner = " ".join(f'(lin "{c}" {t.sexpr})' for t, c in self.terms)
        return f"(vec{' ' + inner if inner else ''})"

    @cached_property
    def key(self):
        return tuple((t.sort_key, c.key) for t, c in self.terms)

    def __eq__(self, other):
        if not isinstance(other, VecExpr):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return self.sexpr

    @cached_property
    def support(self):
        s = EMPTY_SUPPORT
        for t, _ in self.terms:
            s = s | t.support
        return s

    def _other(self, other):
        if isinstance(other, VecExpr):
            return other
        if _is_vt(other):
            return VecExpr.atom(other, self.registry)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return VecExpr(self.registry, list(self.terms) + list(o.terms))

    __radd__ = __add__

    def __neg__(self):
        return VecExpr(self.registry, [(t, -c) for t, c in self.terms])

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            scalar = self.registry.const(scalar)
        if not isinstance(scalar, RatFunc):
            return NotImplemented
        return VecExpr(self.registry, [(t, c * scalar) for t, c in self.terms])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, Fraction)):
            scalar = self.registry.const(scalar)
        return self * (self.registry.one() / scalar)

    def coeff(self, t):
        for t2, c in self.terms:
            if t2 == t:
                return c
        return self.registry.zero()

    def atoms(self):
        return [t for t, _ in self.terms]

    def cross(self, other) -> "VecExpr":
        o = as_vec(other, self.registry)
        return VecExpr(self.registry, [(Cross(a, b), ca * cb)
                                       for a, ca in self.terms for b, cb in o.terms])

    def subs(self, mapping) -> "VecExpr":
        """Replace atoms per ``mapping`` (atom -> VecExpr); recursive into fields."""
        items = []
        for t, c in self.terms:
            for c2, t2 in _subst_vt(t, mapping, self.registry).terms_c():
                items.append((t2, c * c2))
        return VecExpr(self.registry, items)

    def terms_c(self):
        return [(c, t) for t, c in self.terms]

    def sign_normalized(self):
        """``(sign, v)`` with ``v`` or ``-v`` chosen so its leading coefficient is positive."""
        if self.terms and self.terms[0][1].is_negative():
            return -1, -self
        return 1, self


def _cross_canon(a, b, reg):
    """Canonical ``a ^ b`` for canonical terms ``a``, ``b``: list of (coeff, term).

    Antisymmetry is applied to every pair.  For noncommuting position and
    momentum atoms the commutator is symmetric in the Cartesian indices, so the
    epsilon contraction removes it and ``r ^ p = -p ^ r`` still holds.
    """
    if a == b:
        return []
    if b.sort_key < a.sort_key:
        return [(-reg.one(), Cross(b, a))]
    return [(reg.one(), Cross(a, b))]


def _expand_vt(t, reg):
    """Multilinear expansion of a vector term into canonical ``[(coeff, term)]``."""
    if isinstance(t, (Pos, Mom, Spin, Moment)):
        return [(reg.one(), t)]
    if isinstance(t, VecExpr):
        if t.registry is not reg and t.terms:
            raise RegistryMismatchError("vector from a different registry")
        return [(c, x) for x, c in t.terms]
    if isinstance(t, FieldAtom):
        if t.is_canonical:
            return [(reg.one(), t)]
        return t.expand(reg)
    if isinstance(t, Cross):
        out = []
        for ca, a in _expand_vt(t.left, reg):
            for cb, b in _expand_vt(t.right, reg):
                for s, x in _cross_canon(a, b, reg):
                    out.append((ca * cb * s, x))
        return out
    raise TypeError(f"not a vector term: {t!r}")


def _subst_vt(t, mapping, reg) -> VecExpr:
    if isinstance(t, (Pos, Mom, Spin, Moment)):
        img = mapping.get(t)
        if img is None:
            return VecExpr.atom(t, reg)
        img = as_vec(img, reg)
        if img.terms and img.registry is not reg:
            raise RegistryMismatchError(
                f"substitution image for {t.sexpr} uses a different symbol registry")
        return img
    if isinstance(t, FieldAtom):
        point = t.point.subs(mapping)
        dirs = [(x.subs(mapping), n) for x, n in t.dirs]
        return VecExpr(reg, [(FieldAtom(t.kind, point, t.scale, dirs), reg.one())])
    if isinstance(t, Cross):
        return _subst_vt(t.left, mapping, reg).cross(_subst_vt(t.right, mapping, reg))
    raise TypeError(f"not a vector term: {t!r}")
