"""Canonical text form of operator expressions.

Grammar (whitespace-insensitive)::

    op      := "(op" term* ")"
    term    := "(term" "(coef" ("(g" INT STRING ")")+ ")" "(herm" ("0"|"1") ")" factor* ")"
    factor  := "(dot" vt vt ")" | "(invnorm" vec ")" | "(named" NAME ")"
    vt      := "(pos" FRAME INT ")" | "(mom" FRAME INT ")" | "(spin" INT ")"
             | "(moment" INT ")" | "(cross" vt vt ")"
             | "(field" KIND vec INT "(dirs" vt* ")" ")" | vec
    vec     := "(vec" ("(lin" STRING vt ")")* ")"

Coefficient strings are rational functions in the infix syntax accepted by
:meth:`Registry.parse`.  ``dumps(loads(s)) == s`` for canonical input.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .operators import Dot, InverseNorm, Named, OpExpr, OpTerm, canonicalize
from .scalars import Registry, ScalarExpr, UnknownSymbolError, default_registry
from .vectors import FIELD_KINDS, FRAMES, Cross, FieldAtom, Moment, Mom, Pos, Spin, VecExpr

__all__ = ["dumps", "loads", "loads_vec", "SexprError"]


class SexprError(ValueError):
    """Malformed canonical text; carries a 1-based line and column."""

    def __init__(self, message, line, col, suggestions=()):
        self.line = line
        self.col = col
        self.suggestions = list(suggestions)
        super().__init__(f"line {line}, column {col}: {message}")


def _coef_sexpr(c: ScalarExpr) -> str:
    parts = " ".join(f'(g {g} "{c.at(g)}")' for g in c.grades())
    return f"(coef {parts})"


def dumps(e: OpExpr) -> str:
    e = canonicalize(e)
    if not e.terms:
        return "(op)"
    out = []
    for t in e.terms:
        fs = "".join(" " + f.sexpr for f in t.factors)
        out.append(f"(term {_coef_sexpr(t.coef)} (herm {int(t.herm)}){fs})")
    return "(op " + " ".join(out) + ")"


_TOKEN = re.compile(r'\s*(?:(\()|(\))|("(?:[^"\\]|\\.)*")|([^\s()"]+))')


@dataclass
class _Tok:
    kind: str  # "(", ")", "str", "sym"
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    pos = 0
    n = len(text)
    line_starts = [0] + [i + 1 for i, ch in enumerate(text) if ch == "\n"]

    def loc(i):
        import bisect
        ln = bisect.bisect_right(line_starts, i)
        return ln, i - line_starts[ln - 1] + 1

    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise SexprError("unterminated string", *loc(pos))
        start = m.start(m.lastindex)
        line, col = loc(start)
        if m.group(1):
            toks.append(_Tok("(", "(", line, col))
        elif m.group(2):
            toks.append(_Tok(")", ")", line, col))
        elif m.group(3) is not None:
            toks.append(_Tok("str", m.group(3)[1:-1], line, col))
        else:
            toks.append(_Tok("sym", m.group(4), line, col))
        pos = m.end()
    end = loc(n) if n else (1, 1)
    return toks, end


class _Parser:
    def __init__(self, text, registry, local=None):
        self.toks, self.end = _tokenize(text)
        self.i = 0
        self.reg = registry
        self.local = local

    def err(self, msg, tok=None):
        if tok is None:
            tok = self.toks[self.i] if self.i < len(self.toks) else None
        if tok is None:
            raise SexprError(msg + " (unexpected end of input)", *self.end)
        raise SexprError(msg, tok.line, tok.col)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            self.err("unexpected end of input")
        self.i += 1
        return t

    def expect(self, kind, text=None):
        t = self.next()
        if t.kind != kind or (text is not None and t.text != text):
            self.err(f"expected {text or kind!r}, found {t.text!r}", t)
        return t

    def open(self, *heads):
        self.expect("(")
        t = self.next()
        if t.kind != "sym" or (heads and t.text not in heads):
            self.err(f"expected one of {', '.join(heads)}; found {t.text!r}", t)
        return t

    def close(self):
        self.expect(")")

    def integer(self):
        t = self.next()
        try:
            return int(t.text)
        except ValueError:
            self.err(f"expected an integer, found {t.text!r}", t)

    def ratfunc(self):
        t = self.expect("str")
        try:
            return self.reg.parse(t.text, self.local)
        except UnknownSymbolError as exc:
            raise SexprError(str(exc), t.line, t.col, exc.suggestions) from exc
        except ValueError as exc:
            raise SexprError(str(exc), t.line, t.col) from exc

    def at_close(self):
        t = self.peek()
        return t is not None and t.kind == ")"

    # -- grammar ---------------------------------------------------------------
    def op(self):
        self.open("op")
        terms = []
        while not self.at_close():
            terms.append(self.term())
        self.close()
        return OpExpr(self.reg, terms)

    def term(self):
        self.open("term")
        self.open("coef")
        parts = {}
        while not self.at_close():
            self.open("g")
            g = self.integer()
            parts[g] = self.ratfunc()
            self.close()
        self.close()
        self.open("herm")
        t = self.next()
        if t.text not in ("0", "1"):
            self.err("herm flag must be 0 or 1", t)
        self.close()
        factors = []
        while not self.at_close():
            factors.append(self.factor())
        self.close()
        return OpTerm(ScalarExpr(self.reg, parts), factors, t.text == "1")

    def factor(self):
        head = self.open("dot", "invnorm", "named")
        if head.text == "dot":
            a = self.vt()
            b = self.vt()
            self.close()
            return Dot(a, b)
        if head.text == "invnorm":
            v = self.vt()
            self.close()
            if not isinstance(v, VecExpr):
                v = VecExpr.atom(v, self.reg)
            try:
                return InverseNorm(v)
            except ValueError as exc:
                self.err(str(exc), head)
        t = self.expect("sym")
        self.close()
        try:
            return Named(t.text)
        except ValueError as exc:
            self.err(str(exc), t)

    def vt(self):
        start = self.peek()
        try:
            return self._vt()
        except SexprError:
            raise
        except (ValueError, TypeError) as exc:
            self.err(str(exc), start)

    def _vt(self):
        head = self.open("pos", "mom", "spin", "moment", "cross", "field", "vec")
        h = head.text
        if h in ("pos", "mom"):
            fr = self.expect("sym")
            if fr.text not in FRAMES:
                self.err(f"unknown frame {fr.text!r}", fr)
            idx = self.integer()
            self.close()
            return (Pos if h == "pos" else Mom)(idx, fr.text)
        if h in ("spin", "moment"):
            idx = self.integer()
            self.close()
            return (Spin if h == "spin" else Moment)(idx)
        if h == "cross":
            a = self.vt()
            b = self.vt()
            self.close()
            return Cross(a, b)
        if h == "field":
            k = self.expect("sym")
            if k.text not in FIELD_KINDS:
                self.err(f"unknown field kind {k.text!r}", k)
            point = self.vt()
            if not isinstance(point, VecExpr):
                point = VecExpr.atom(point, self.reg)
            scale = self.integer()
            self.open("dirs")
            dirs = []
            while not self.at_close():
                d = self.vt()
                dirs.append((d if isinstance(d, VecExpr) else VecExpr.atom(d, self.reg), 1))
            self.close()
            self.close()
            return FieldAtom(k.text, point, scale, dirs)
        items = []
        while not self.at_close():
            self.open("lin")
            c = self.ratfunc()
            t = self.vt()
            self.close()
            items.append((t, c))
        self.close()
        return VecExpr(self.reg, items)

    def done(self):
        t = self.peek()
        if t is not None:
            self.err(f"trailing input {t.text!r}", t)


def loads(text: str, registry: Registry | None = None, local=None) -> OpExpr:
    """Parse canonical text back into a (canonicalized) :class:`OpExpr`.

    ``local`` maps extra scalar names (file-level definitions) to values.
    """
    p = _Parser(text, registry or default_registry(), local)
    e = p.op()
    p.done()
    return canonicalize(e)


def loads_vec(text: str, registry: Registry | None = None, local=None) -> VecExpr:
    p = _Parser(text, registry or default_registry(), local)
    v = p.vt()
    p.done()
    return v if isinstance(v, VecExpr) else VecExpr.atom(v, p.reg)
