"""Deterministic LaTeX rendering of operator expressions (output only)."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

from ..symkernel import (
    Cross,
    Dot,
    FieldAtom,
    InverseNorm,
    Mom,
    Moment,
    Named,
    OpExpr,
    Pos,
    RatFunc,
    Spin,
    VecExpr,
    canonicalize,
)

__all__ = ["LatexPrinter", "print_latex", "latex_ratfunc", "default_rewrites"]

SYMBOLS = {
    "hbar": r"\hbar",
    "eps0": r"\varepsilon_0",
    "pi": r"\pi",
    "alpha": r"\alpha",
    "lam": r"\lambda",
    "lam2": r"\lambda'",
    "mu": r"\mu",
}
NAMED = {"H_f": "H_f", "SelfEnergy": r"\Sigma_{\mathrm{self}}"}


def _symbol(name: str) -> str:
    if name in SYMBOLS:
        return SYMBOLS[name]
    m = re.fullmatch(r"([A-Za-z]+)_?(\d+)", name)
    if m:
        return f"{m.group(1)}_{{{m.group(2)}}}"
    return name if len(name) == 1 else rf"\mathrm{{{name}}}"


def _monomial(m) -> str:
    parts = []
    for name, e in m:
        s = _symbol(name)
        parts.append(s if e == 1 else f"{s}^{{{e}}}")
    return " ".join(parts)


def _poly(terms) -> tuple:
    """Integer-coefficient polynomial text and number of terms."""
    out = []
    for i, (m, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        c = abs(c)
        body = _monomial(m)
        if body and c == 1:
            txt = body
        elif body:
            txt = f"{c} {body}"
        else:
            txt = str(c)
        out.append((sign, txt))
    s = ""
    for i, (sign, txt) in enumerate(out):
        if i == 0:
            s = ("-" if sign == "-" else "") + txt
        else:
            s += f" {sign} {txt}"
    return s, len(out)


def _integerize(num, den):
    """Scale numerator and denominator by a common rational to get coprime integer coefficients."""
    coeffs = [c for _, c in num] + [c for _, c in den]
    L = 1
    for c in coeffs:
        L = lcm(L, Fraction(c).denominator)
    G = 0
    for c in coeffs:
        G = gcd(G, int(Fraction(c) * L))
    k = Fraction(L, G or 1)
    num = [(m, int(Fraction(c) * k)) for m, c in num]
    den = [(m, int(Fraction(c) * k)) for m, c in den]
    if den and den[0][1] < 0:
        num = [(m, -c) for m, c in num]
        den = [(m, -c) for m, c in den]
    return num, den


def latex_ratfunc(rf: RatFunc) -> tuple:
    """``(sign, body)`` where body is the magnitude in LaTeX ("1" for unity)."""
    num, den = _integerize(rf.numerator_terms(), rf.denominator_terms())
    if not num:
        return "+", "0"
    sign = "+"
    if len(num) == 1 and num[0][1] < 0:
        sign = "-"
        num = [(num[0][0], -num[0][1])]
    ntxt, nn = _poly(num)
    dtxt, dn = _poly(den)
    if dtxt == "1":
        return sign, (ntxt if nn == 1 else rf"\left({ntxt}\right)")
    return sign, rf"\frac{{{ntxt}}}{{{dtxt}}}"


@dataclass
class LatexPrinter:
    """Render OpExpr values.

    ``Z`` fixes the evaluation-point prefix (``Z\\alpha``; plain ``\\mu`` when None).
    ``rewrites`` lists ``(value, latex_name)`` pairs: a coefficient equal to
    a mass-free factor times ``value`` (or divided by it) prints with the name.
    """

    Z: int | None = None
    rewrites: list = field(default_factory=list)
    show_grade: bool = False

    # -- scalars -------------------------------------------------------------------
    def coef(self, rf: RatFunc) -> tuple:
        for value, name in self.rewrites:
            for op, ratio in (("mul", rf / value), ("div", rf * value)):
                if ratio.free_symbols() & _mass_symbols(value):
                    continue
                s, body = latex_ratfunc(ratio)
                if op == "mul":
                    return s, (name if body == "1" else f"{body} {name}")
                if body.startswith(r"\frac{"):
                    n, d = _split_frac(body)
                    return s, rf"\frac{{{n}}}{{{d} {name}}}"
                return s, (rf"\frac{{1}}{{{name}}}" if body == "1" else rf"\frac{{{body}}}{{{name}}}")
        return latex_ratfunc(rf)

    # -- vectors ---------------------------------------------------------------------
    def point(self, f: FieldAtom) -> str:
        if self.Z is None:
            pre = r"\mu" if f.scale == 1 else rf"\mu^{{{f.scale}}}"
        else:
            z = "" if self.Z == 1 else str(self.Z)
            pre = rf"{z}\alpha" if f.scale == 1 else rf"({z}\alpha)^{{{f.scale}}}"
        inner = self.vec(f.point, bare=True)
        if len(f.point.terms) > 1:
            inner = rf"\left({inner}\right)"
        return f"{pre} {inner}"

    def vt(self, x) -> str:
        if isinstance(x, Pos):
            return (f"R_{{{x.index}}}" if x.frame == "jac" else f"r_{{{x.index}}}")
        if isinstance(x, Mom):
            return (f"P_{{{x.index}}}" if x.frame == "jac" else f"p_{{{x.index}}}")
        if isinstance(x, Spin):
            return f"S_{{{x.index}}}"
        if isinstance(x, Moment):
            return rf"\mathcal{{M}}_{{{x.index}}}"
        if isinstance(x, Cross):
            return rf"{self.vt(x.left)} \wedge {self.vt(x.right)}"
        if isinstance(x, FieldAtom):
            pre = ""
            for d, n in x.dirs:
                inner = rf"\left({self.vec(d, bare=True)}\right) \cdot \nabla" \
                    if len(d.terms) > 1 else rf"{self.vec(d, bare=True)} \cdot \nabla"
                pre += rf"\left({inner}\right)" + (f"^{{{n}}}" if n != 1 else "") + " "
            return f"{pre}{x.kind if x.kind != 'Pi' else chr(92) + 'Pi'}({self.point(x)})"
        if isinstance(x, VecExpr):
            return self.vec(x)
        raise TypeError(f"cannot render {x!r}")

    def vec(self, v: VecExpr, bare: bool = False) -> str:
        if not v.terms:
            return "0"
        parts = []
        for t, c in v.terms:
            s, body = self.coef(c)
            txt = self.vt(t)
            if isinstance(t, Cross):
                txt = rf"\left({txt}\right)" if len(v.terms) > 1 or body != "1" else txt
            parts.append((s, txt if body == "1" else f"{body} {txt}"))
        out = _join(parts)
        if bare or len(v.terms) == 1:
            return out
        return rf"\left({out}\right)"

    # -- factors and terms ---------------------------------------------------------------
    def _dot_side(self, x) -> str:
        txt = self.vt(x)
        if isinstance(x, Cross) or (isinstance(x, VecExpr) and len(x.terms) > 1):
            return rf"\left({txt}\right)" if not txt.startswith(r"\left(") else txt
        return txt

    def factor(self, f) -> str:
        if isinstance(f, Dot):
            if f.left == f.right:
                side = self._dot_side(f.left)
                return f"{side}^{{2}}"
            return rf"{self._dot_side(f.left)} \cdot {self._dot_side(f.right)}"
        if isinstance(f, InverseNorm):
            return rf"\frac{{1}}{{\left|{self.vec(f.arg, bare=True)}\right|}}"
        if isinstance(f, Named):
            return NAMED.get(f.name, rf"\mathrm{{{f.name}}}")
        raise TypeError(f"cannot render {f!r}")

    def term(self, t) -> list:
        out = []
        for g in t.coef.grades():
            s, body = self.coef(t.coef.at(g))
            prod = " ".join(self.factor(f) for f in t.factors)
            if t.herm:
                prod = rf"\left[{prod} + \mathrm{{h.c.}}\right]"
            if self.show_grade and g:
                body = (rf"\mu^{{{g}}}" if body == "1" else rf"\mu^{{{g}}} {body}")
            if len(t.factors) == 1 and isinstance(t.factors[0], InverseNorm) and not t.herm:
                norm = rf"\left|{self.vec(t.factors[0].arg, bare=True)}\right|"
                if body.startswith(r"\frac{"):
                    n, d = _split_frac(body)
                    out.append((s, rf"\frac{{{n}}}{{{d} {norm}}}"))
                else:
                    out.append((s, rf"\frac{{{body}}}{{{norm}}}"))
                continue
            if not prod:
                out.append((s, body))
            elif body == "1":
                out.append((s, prod))
            elif body.startswith(r"\frac{1}{"):
                out.append((s, rf"{body} {prod}"))
            else:
                out.append((s, f"{body} {prod}"))
        return out

    def render(self, e: OpExpr) -> str:
        e = canonicalize(e)
        parts = []
        for t in e.terms:
            parts.extend(self.term(t))
        return _join(parts) if parts else "0"


def _join(parts) -> str:
    s = ""
    for i, (sign, txt) in enumerate(parts):
        if i == 0:
            s = ("-" if sign == "-" else "") + txt
        else:
            s += f" {sign} {txt}"
    return s


def _split_frac(body: str):
    # body = \frac{N}{D} with balanced braces
    depth = 0
    start = len(r"\frac{")
    for i in range(start, len(body)):
        ch = body[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            if depth == 0:
                return body[start:i], body[i + 2:-1]
            depth -= 1
    return body, "1"


def _mass_symbols(value: RatFunc) -> set:
    reg = value.registry
    return {n for n in value.free_symbols() if reg.kind(n) == "mass"}


def default_rewrites(scheme) -> list:
    """Effective masses of a Jacobi scheme as ``M_j`` (largest expressions first)."""
    if scheme is None:
        return []
    out = [(scheme.effective_masses[j], f"M_{{{j}}}") for j in sorted(scheme.effective_masses)]
    keep = []
    for j, (v, n) in enumerate(out):
        monomial = len(v.numerator_terms()) == 1 and len(v.denominator_terms()) == 1
        if j == 0 or not monomial:
            keep.append((v, n))
    return keep


def print_latex(e: OpExpr, Z: int | None = None, rewrites=None) -> str:
    return LatexPrinter(Z, list(rewrites or [])).render(e)
