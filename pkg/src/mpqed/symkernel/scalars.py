"""Exact scalar coefficients.

Two layers live here:

* :class:`RatFunc` -- a normalized rational function with integer-content
  polynomials over the symbols of a :class:`Registry`.
* :class:`ScalarExpr` -- a finite map ``grade -> RatFunc`` where the grade is
  the integer power of the expansion parameter mu.  mu itself never enters a
  rational function.

Arithmetic on ``RatFunc`` is delegated to sympy's sparse rational function
fields; normalization (monic denominator, deterministic term order) and the
textual canonical form are done here so that output never depends on the
registration order of symbols.
"""
from __future__ import annotations

import difflib
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from sympy import Symbol
from sympy.polys.domains import ZZ
from sympy.polys.fields import FracField
from . import _fastfrac as _ff

__all__ = [
    "KINDS",
    "ScalarSymbol",
    "Registry",
    "RatFunc",
    "ScalarExpr",
    "RegistryMismatchError",
    "UnknownSymbolError",
    "ScalarSyntaxError",
    "default_registry",
]

KINDS = (
    "mass",
    "charge-unit",
    "fundamental-constant",
    "coupling",
    "grading",
    "integration",
)


class RegistryMismatchError(ValueError):
    """Operands were built over different symbol registries."""


class UnknownSymbolError(KeyError):
    def __init__(self, name, suggestions=()):
        self.name = name
        self.suggestions = list(suggestions)
        self.pos = None
        super().__init__(name)

    def __str__(self):
        msg = f"unknown symbol {self.name!r}"
        if self.pos is not None:
            msg += f" at column {self.pos + 1}"
        if self.suggestions:
            msg += f" (did you mean: {', '.join(self.suggestions)})"
        return msg


class ScalarSyntaxError(ValueError):
    def __init__(self, message, text, pos):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at column {pos + 1} in {text!r}")


@dataclass(frozen=True)
class ScalarSymbol:
    name: str
    kind: str
    dimension: str = ""


class Registry:
    """Append-only table of scalar symbols and derived-symbol definitions.

    Definitions (``M1 = m1 + m2``) are macros: they are expanded on parse so
    normalized values only ever contain primitive symbols.
    """

    def __init__(self, name="session"):
        self.name = name
        self._symbols: dict[str, ScalarSymbol] = {}
        self._order: list[str] = []
        self._defs: dict[str, RatFunc] = {}
        self._consts: dict = {}
        self._fields: dict[int, FracField] = {}
        self._lock = threading.RLock()

    def __repr__(self):
        return f"Registry({self.name!r}, {len(self._order)} symbols)"

    # -- symbols -----------------------------------------------------------
    def symbol(self, name, kind="fundamental-constant", dimension=""):
        if kind not in KINDS:
            raise ValueError(f"unknown symbol kind {kind!r}")
        with self._lock:
            if name in self._defs:
                raise ValueError(f"{name!r} is already a definition")
            old = self._symbols.get(name)
            if old is not None:
                if old.kind != kind:
                    raise ValueError(
                        f"symbol {name!r} already registered with kind {old.kind!r}")
                return old
            if kind == "grading" and any(
                    s.kind == "grading" for s in self._symbols.values()):
                raise ValueError("only one grading symbol is allowed")
            sym = ScalarSymbol(name, kind, dimension)
            self._symbols[name] = sym
            if kind != "grading":
                self._order.append(name)
            return sym

    def symbols(self, names, kind="fundamental-constant"):
        return [self.symbol(n, kind) for n in names.replace(",", " ").split()]

    def __contains__(self, name):
        return name in self._symbols or name in self._defs

    def kind(self, name):
        return self._symbols[name].kind

    def names(self):
        return list(self._symbols)

    def define(self, name, value):
        """Register ``name`` as shorthand for ``value`` (RatFunc or text)."""
        with self._lock:
            if name in self._symbols:
                raise ValueError(f"{name!r} is already a primitive symbol")
            if isinstance(value, str):
                value = self.parse(value)
            self._check(value)
            old = self._defs.get(name)
            if old is not None and old != value:
                raise ValueError(f"conflicting definition for {name!r}")
            self._defs[name] = value
            return value

    def definitions(self):
        return dict(self._defs)

    # -- field management ----------------------------------------------------
    def field(self):
        with self._lock:
            n = len(self._order)
            fld = self._fields.get(n)
            if fld is None:
                gens = [Symbol(s) for s in self._order] or [Symbol("_one")]
                fld = FracField(gens, ZZ)
                self._fields[n] = fld
            return fld

    @cached_property
    def _name_rank(self):
        return {}

    def _rank(self, name):
        # alphabetical rank, recomputed lazily when new symbols appear
        ranks = self._name_rank
        if name not in ranks or len(ranks) != len(self._order):
            ranks.clear()
            for i, n in enumerate(sorted(self._order)):
                ranks[n] = i
        return ranks[name]

    def _check(self, rf):
        if rf.registry is not self:
            raise RegistryMismatchError(
                f"value from {rf.registry!r} used with {self!r}")

    # -- constructors --------------------------------------------------------
    def const(self, value) -> RatFunc:
        q = Fraction(value)
        fld = self.field()
        key = (q, len(self._order))
        hit = self._consts.get(key)
        if hit is None:
            ring = fld.ring
            hit = RatFunc(self, fld.raw_new(ring(q.numerator), ring(q.denominator)))
            if len(self._consts) < 4096:
                self._consts[key] = hit
        return hit

    def zero(self):
        return self.const(0)

    def one(self):
        return self.const(1)

    def rf(self, name) -> RatFunc:
        if name in self._defs:
            return self._defs[name]
        sym = self._symbols.get(name)
        if sym is None:
            raise UnknownSymbolError(name, self.suggest(name))
        if sym.kind == "grading":
            raise ValueError(
                f"grading symbol {name!r} cannot appear in a rational function; "
                "use an integer grade instead")
        fld = self.field()
        return RatFunc(self, fld.gens[self._order.index(name)])

    def suggest(self, name):
        pool = [n for n in list(self._symbols) + list(self._defs)
                if self._symbols.get(n) is None or self._symbols[n].kind != "grading"]
        return difflib.get_close_matches(name, pool, n=4, cutoff=0.5)

    def parse(self, text, local=None) -> RatFunc:
        """Parse infix text; ``local`` maps extra names to RatFunc values."""
        return _InfixParser(self, text, local).parse()


_DEFAULT = Registry("default")


def default_registry() -> Registry:
    return _DEFAULT


def _lift(el, fld):
    if el.field is fld:
        return el
    return el.set_field(fld)


def _monomial_names(gens):
    return [str(g) for g in gens]


class RatFunc:
    """Normalized rational function over a registry's symbols.

    Immutable.  Equality and hashing go through :attr:`key`, which is
    independent of symbol registration order.
    """

    __slots__ = ("registry", "_el", "__dict__")

    def __init__(self, registry: Registry, el):
        self.registry = registry
        self._el = el

    # -- coercion ----------------------------------------------------------
    def _pair(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.registry.const(other)
        elif not isinstance(other, RatFunc):
            return None, None
        if other.registry is not self.registry:
            raise RegistryMismatchError(
                f"cannot combine values from {self.registry!r} and {other.registry!r}")
        a, b = self._el, other._el
        if a.field is not b.field:
            fld = self.registry.field()
            a, b = _lift(a, fld), _lift(b, fld)
        return a, b

    def __add__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return RatFunc(self.registry, _ff.add(a, b))

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return RatFunc(self.registry, _ff.add(a, b, -1))

    def __rsub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return RatFunc(self.registry, _ff.add(b, a, -1))

    def __mul__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return RatFunc(self.registry, _ff.mul(a, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        if not b:
            raise ZeroDivisionError("division by a zero rational function")
        return RatFunc(self.registry, _ff.mul(a, _ff.inv(b)))

    def __rtruediv__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        if not a:
            raise ZeroDivisionError("division by a zero rational function")
        return RatFunc(self.registry, _ff.mul(b, _ff.inv(a)))

    def __neg__(self):
        return RatFunc(self.registry, -self._el)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.registry.one() / (self ** (-n))
        return RatFunc(self.registry, self._el ** n)

    def __bool__(self):
        return bool(self._el)

    def is_zero(self):
        return not self._el

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.key == self.registry.const(other).key
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.registry is other.registry and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    # -- normal form -------------------------------------------------------
    @cached_property
    def _normal(self):
        el = self._el
        names = _monomial_names(el.field.symbols)
        reg = self.registry

        def named(poly):
            out = {}
            for mon, c in poly.terms():
                m = tuple(sorted((names[i], e) for i, e in enumerate(mon) if e))
                out[m] = Fraction(int(c))
            return out

        num, den = named(el.numer), named(el.denom)
        if not num:
            return (), (((), Fraction(1)),)

        def mkey(m):
            # graded-lex, variables in alphabetical order
            vec = [0] * len(reg._order)
            for n, e in m:
                vec[reg._rank(n)] = e
            return (sum(e for _, e in m), tuple(vec))

        lead = max(den, key=mkey)
        lc = den[lead]
        num = sorted(((m, c / lc) for m, c in num.items()), key=lambda t: mkey(t[0]), reverse=True)
        den = sorted(((m, c / lc) for m, c in den.items()), key=lambda t: mkey(t[0]), reverse=True)
        return tuple(num), tuple(den)

    @property
    def key(self):
        return self._normal

    def numerator_terms(self):
        return self._normal[0]

    def denominator_terms(self):
        return self._normal[1]

    def is_constant(self):
        num, den = self._normal
        return den == (((), Fraction(1)),) and all(m == () for m, _ in num)

    def as_fraction(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not a rational constant")
        num = self._normal[0]
        return num[0][1] if num else Fraction(0)

    def is_negative(self):
        """Sign convention: the leading numerator coefficient is negative."""
        num = self._normal[0]
        return bool(num) and num[0][1] < 0

    def free_symbols(self):
        out = set()
        for part in self._normal:
            for m, _ in part:
                out.update(n for n, _ in m)
        return out

    def __str__(self):
        num, den = self._normal
        ns = _poly_str(num)
        if den == (((), Fraction(1)),):
            return ns
        ds = _poly_str(den)
        if len(num) > 1:
            ns = f"({ns})"
        if len(den) > 1 or den[0][1] != 1 or len(den[0][0]) > 1 or any(e > 1 for _, e in den[0][0]):
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"RatFunc({str(self)!r})"

    # -- polynomial structure in one variable --------------------------------
    def poly_in(self, name):
        """Split as ``sum_k c_k * name**k`` with coefficients free of ``name``.

        Raises ``ValueError`` if ``name`` occurs in the denominator.
        """
        num, den = self._normal
        if any(n == name for m, _ in den for n, _ in m):
            raise ValueError(f"{name!r} occurs in a denominator: {self}")
        reg = self.registry
        denom = _rebuild(reg, den)
        parts: dict[int, list] = {}
        for m, c in num:
            k = dict(m).get(name, 0)
            rest = tuple((n, e) for n, e in m if n != name)
            parts.setdefault(k, []).append((rest, c))
        return {k: _rebuild(reg, terms) / denom for k, terms in parts.items()}

    def to_sympy(self):
        from sympy import Integer, Rational

        def build(terms):
            expr = Integer(0)
            for m, c in terms:
                t = Rational(c.numerator, c.denominator)
                for n, e in m:
                    t = t * Symbol(n) ** e
                expr = expr + t
            return expr

        num, den = self._normal
        return build(num) / build(den)


def _rebuild(reg, terms):
    out = reg.zero()
    for m, c in terms:
        t = reg.const(c)
        for n, e in m:
            t = t * reg.rf(n) ** e
        out = out + t
    return out


def _fmt_coeff(c: Fraction):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _poly_str(terms):
    if not terms:
        return "0"
    out = []
    for i, (m, c) in enumerate(terms):
        neg = c < 0
        a = -c if neg else c
        mono = "*".join(n if e == 1 else f"{n}**{e}" for n, e in m)
        if not mono:
            body = _fmt_coeff(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_fmt_coeff(a)}*{mono}"
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


class _InfixParser:
    """Recursive-descent parser for ``+ - * / ** ^ ( )``, integers and names."""

    def __init__(self, registry, text, local=None):
        self.reg = registry
        self.text = text
        self.pos = 0
        self.local = local or {}

    def parse(self):
        val = self.expr()
        self.ws()
        if self.pos != len(self.text):
            raise ScalarSyntaxError("unexpected character", self.text, self.pos)
        return val

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self):
        if self.peek() in ("+", "-"):
            sign = self.text[self.pos]
            self.pos += 1
            val = self.term()
            val = -val if sign == "-" else val
        else:
            val = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.power()
        while True:
            ch = self.peek()
            if ch == "*" and not self.text.startswith("**", self.pos):
                self.pos += 1
                val = val * self.power()
            elif ch == "/":
                self.pos += 1
                at = self.pos
                rhs = self.power()
                if rhs.is_zero():
                    raise ScalarSyntaxError("division by zero", self.text, at)
                val = val / rhs
            else:
                return val

    def power(self):
        base = self.atom()
        self.ws()
        if self.text.startswith("**", self.pos) or self.peek() == "^":
            self.pos += 2 if self.text.startswith("**", self.pos) else 1
            self.ws()
            sign = 1
            if self.peek() == "-":
                sign = -1
                self.pos += 1
            at = self.pos
            tok = self.read_while(str.isdigit)
            if not tok:
                raise ScalarSyntaxError("expected integer exponent", self.text, at)
            return base ** (sign * int(tok))
        return base

    def read_while(self, pred):
        start = self.pos
        while self.pos < len(self.text) and pred(self.text[self.pos]):
            self.pos += 1
        return self.text[start:self.pos]

    def atom(self):
        ch = self.peek()
        at = self.pos
        if ch == "(":
            self.pos += 1
            val = self.expr()
            if self.peek() != ")":
                raise ScalarSyntaxError("expected ')'", self.text, self.pos)
            self.pos += 1
            return val
        if ch == "-":
            self.pos += 1
            return -self.power()
        if ch.isdigit():
            tok = self.read_while(str.isdigit)
            return self.reg.const(int(tok))
        if ch.isalpha() or ch == "_":
            tok = self.read_while(lambda c: c.isalnum() or c == "_")
            if self.peek() == "(":
                raise ScalarSyntaxError(
                    f"function {tok!r} not allowed (radicals and transcendental "
                    "functions are not representable; use a definition)",
                    self.text, at)
            if tok in self.local:
                return self.local[tok]
            try:
                return self.reg.rf(tok)
            except UnknownSymbolError as exc:
                exc.pos = at
                if not exc.suggestions and self.local:
                    exc.suggestions = difflib.get_close_matches(tok, list(self.local), n=4, cutoff=0.5)
                raise
        raise ScalarSyntaxError(
            "unexpected end of input" if not ch else f"unexpected {ch!r}", self.text, at)


class ScalarExpr:
    """Graded coefficient: ``sum_g mu**g * c_g`` with ``c_g`` rational functions."""

    __slots__ = ("registry", "_parts", "__dict__")

    def __init__(self, registry: Registry, parts: Mapping[int, RatFunc] | Iterable = ()):
        self.registry = registry
        items = parts.items() if isinstance(parts, Mapping) else parts
        clean = {}
        for g, c in items:
            if c.registry is not registry:
                raise RegistryMismatchError("coefficient from a different registry")
            if g in clean:
                c = clean[g] + c
            clean[g] = c
        self._parts = {g: c for g, c in sorted(clean.items()) if not c.is_zero()}

    @classmethod
    def of(cls, value, grade=0, registry=None):
        if isinstance(value, ScalarExpr):
            return value.shift(grade) if grade else value
        if isinstance(value, RatFunc):
            return cls(value.registry, {grade: value})
        reg = registry or _DEFAULT
        if isinstance(value, str):
            return cls(reg, {grade: reg.parse(value)})
        return cls(reg, {grade: reg.const(value)})

    @property
    def parts(self):
        return dict(self._parts)

    def grades(self):
        return list(self._parts)

    def at(self, grade):
        return self._parts.get(grade, self.registry.zero())

    def is_zero(self):
        return not self._parts

    def _coerce(self, other):
        if isinstance(other, ScalarExpr):
            if other.registry is not self.registry:
                raise RegistryMismatchError("ScalarExpr operands from different registries")
            return other
        if isinstance(other, RatFunc):
            return ScalarExpr(self.registry, {0: other})
        if isinstance(other, (int, Fraction)):
            return ScalarExpr(self.registry, {0: self.registry.const(other)})
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        parts = dict(self._parts)
        for g, c in o._parts.items():
            parts[g] = parts[g] + c if g in parts else c
        return ScalarExpr(self.registry, parts)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr(self.registry, {g: -c for g, c in self._parts.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        parts: dict[int, RatFunc] = {}
        for g1, c1 in self._parts.items():
            for g2, c2 in o._parts.items():
                g = g1 + g2
                p = c1 * c2
                parts[g] = parts[g] + p if g in parts else p
        return ScalarExpr(self.registry, parts)

    __rmul__ = __mul__

    def shift(self, dg):
        return ScalarExpr(self.registry, {g + dg: c for g, c in self._parts.items()})

    def map(self, fn):
        return ScalarExpr(self.registry, {g: fn(c) for g, c in self._parts.items()})

    @property
    def key(self):
        return tuple((g, c.key) for g, c in self._parts.items())

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, ScalarExpr) else other
        if o is None:
            return NotImplemented
        return self.registry is o.registry and self.key == o.key

    def __hash__(self):
        return hash(self.key)

    def is_negative(self):
        return bool(self._parts) and next(iter(self._parts.values())).is_negative()

    def __str__(self):
        if not self._parts:
            return "0"
        return " + ".join(f"mu^{g}*({c})" if g else f"({c})" for g, c in self._parts.items())

    def __repr__(self):
        return f"ScalarExpr({self})"
