"""Field atoms, dilation axioms and the Taylor expansion of field operators."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial

from .constants import ensure_constants
from .symkernel import (
    Cross,
    Dot,
    FieldAtom,
    InverseNorm,
    Mom,
    Moment,
    Named,
    OpExpr,
    OpTerm,
    Pos,
    Spin,
    VecExpr,
    as_vec,
    canonicalize,
)

__all__ = [
    "FieldAtom",
    "ScalingAxiom",
    "DilationError",
    "TaylorError",
    "taylor_expand",
    "expand_fields",
    "apply_dilation",
    "field_atoms",
    "replace_fields",
]


class DilationError(ValueError):
    """An atom without a dilation rule was encountered."""


class TaylorError(ValueError):
    """The evaluation point is not of the form mu*(center + X)."""


@dataclass(frozen=True)
class ScalingAxiom:
    """μ-grades picked up by each atom under the dilation Γ.

    Built from the solved exponents ``μ = (Zα)^mu_exp``, ``η = (Zα)^eta_exp``:
    fields carry ``η²`` (``η`` for A), their argument is multiplied by ``η/μ``,
    ``H_f`` picks up ``η``, momenta ``μ`` and positions ``1/μ``.
    """

    mu_exp: Fraction = Fraction(1)
    eta_exp: Fraction = Fraction(2)
    momentum: int = 1
    position: int = -1
    inverse_norm: int = 1
    field_prefactor: dict = field(default_factory=dict)
    point_scale: int = 1
    named: dict = field(default_factory=dict)

    @classmethod
    def from_exponents(cls, mu_exp, eta_exp) -> "ScalingAxiom":
        mu_exp, eta_exp = Fraction(mu_exp), Fraction(eta_exp)
        if mu_exp <= 0:
            raise ValueError("mu must be a positive power of Z*alpha")
        eta = eta_exp / mu_exp  # η as a power of μ

        def grade(q):
            if q.denominator != 1:
                raise ValueError(f"non-integral mu-grade {q}; constants do not fit a grading")
            return int(q)

        pref = {"E": grade(2 * eta), "B": grade(2 * eta), "Pi": grade(2 * eta), "A": grade(eta)}
        named = {"H_f": grade(eta), "SelfEnergy": 3}
        return cls(mu_exp, eta_exp, 1, -1, 1, pref, grade(eta - 1), named)

    def table(self) -> dict:
        """Flat rule table (atom kind -> (prefactor grade, point-dilation grade))."""
        out = {k: (g, self.point_scale) for k, g in self.field_prefactor.items()}
        out.update({k: (g, 0) for k, g in self.named.items()})
        out["Momentum"] = (self.momentum, 0)
        out["Position"] = (self.position, 0)
        out["Position-function"] = (self.inverse_norm, 0)
        return out


DEFAULT_AXIOMS = ScalingAxiom.from_exponents(1, 2)


# -- field-atom traversal ------------------------------------------------------------------
def field_atoms(x) -> list:
    """Field atoms of a vector term / factor in left-to-right order."""
    if isinstance(x, FieldAtom):
        return [x]
    if isinstance(x, Cross):
        return field_atoms(x.left) + field_atoms(x.right)
    if isinstance(x, Dot):
        return field_atoms(x.left) + field_atoms(x.right)
    if isinstance(x, VecExpr):
        out = []
        for t, _ in x.terms:
            out.extend(field_atoms(t))
        return out
    return []


def replace_fields(x, it):
    """Rebuild ``x`` replacing its field atoms, in order, by ``next(it)``."""
    if isinstance(x, FieldAtom):
        return next(it)
    if isinstance(x, Cross):
        left = replace_fields(x.left, it)
        return Cross(left, replace_fields(x.right, it))
    if isinstance(x, Dot):
        left = replace_fields(x.left, it)
        return Dot(left, replace_fields(x.right, it))
    if isinstance(x, VecExpr):
        return VecExpr(x.registry, [(replace_fields(t, it), c) for t, c in x.terms])
    return x


# -- Taylor machinery ------------------------------------------------------------------------
def _default_center(reg):
    return VecExpr.atom(Pos(1, "jac"), reg)


def _relative_part(atom: FieldAtom, center: VecExpr) -> VecExpr:
    if atom.scale != 1:
        raise TaylorError(f"field point must carry exactly one factor of mu: {atom.sexpr}")
    reg = center.registry
    x = atom.point - center
    if x.support.mom or x.support.spins or x.support.fields:
        raise TaylorError(f"X may only contain positions: {x.sexpr}")
    for t, _ in center.terms:
        if isinstance(t, Pos) and t.frame == "jac" and not x.coeff(t).is_zero():
            raise TaylorError(
                f"point {atom.point.sexpr} is not center + X with X free of {t.sexpr}")
    if center.terms and all(isinstance(t, Pos) and t.frame == "lab" for t, _ in center.terms):
        # lab-frame center: X must be a relative vector (coefficients sum to zero)
        total = reg.zero()
        for t, c in x.terms:
            total = total + c
        if not total.is_zero():
            raise TaylorError(f"point {atom.point.sexpr} is not affine about the center")
    return x


def taylor_expand(atom: FieldAtom, order: int, center=None):
    """``F(μ(c + X)) = Σ_n μⁿ/n! (X·∇)ⁿ F(r)|_{r=μc}`` truncated at ``order``.

    Returns ``[(n, 1/n!, FieldAtom)]``; the new atom sits at ``μ·center`` with
    ``(X, n)`` appended to its derivative directions.  Signs follow the literal
    argument of the field.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    reg = atom.point.registry if atom.point.terms else None
    center = as_vec(center, reg) if center is not None else _default_center(reg)
    x = _relative_part(atom, center)
    base = FieldAtom(atom.kind, center, 1, atom.dirs)
    if x.is_zero():
        return [(0, Fraction(1), base)]
    return [(n, Fraction(1, factorial(n)), FieldAtom(atom.kind, center, 1, atom.dirs + ((x, n),)))
            for n in range(order + 1)]


def expand_fields(e: OpExpr, max_grade: int, center=None) -> OpExpr:
    """Taylor-expand every field atom of ``e`` about ``μ·center``, keeping grades ≤ max_grade."""
    e = canonicalize(e)
    reg = e.registry
    out = []
    for t in e.terms:
        g0 = min(t.coef.grades())
        budget = max_grade - g0
        if budget < 0:
            continue
        atoms = [a for f in t.factors for a in field_atoms(f)]
        if not atoms:
            out.append(t)
            continue
        series = [taylor_expand(a, budget, center) for a in atoms]
        for combo in product(*series):
            n = sum(c[0] for c in combo)
            if n > budget:
                continue
            w = Fraction(1)
            for c in combo:
                w *= c[1]
            it = iter([c[2] for c in combo])
            factors = [replace_fields(f, it) for f in t.factors]
            coef = t.coef.shift(n) * reg.const(w)
            out.append(OpTerm(coef, factors, t.herm))
    return canonicalize(OpExpr(reg, out)).truncate(max_grade)


# -- dilation ------------------------------------------------------------------------------
def _vt_grade(x, ax: ScalingAxiom) -> int:
    if isinstance(x, Mom):
        return ax.momentum
    if isinstance(x, Pos):
        return ax.position
    if isinstance(x, (Spin, Moment)):
        return 0
    if isinstance(x, Cross):
        return _vt_grade(x.left, ax) + _vt_grade(x.right, ax)
    if isinstance(x, FieldAtom):
        if x.dirs:
            raise DilationError(f"dilation of a differentiated field is not defined: {x.sexpr}")
        if x.kind not in ax.field_prefactor:
            raise DilationError(f"no dilation rule for field kind {x.kind!r}: {x.sexpr}")
        return ax.field_prefactor[x.kind]
    raise DilationError(f"no dilation rule for atom {x!r}")


def _dilate_vt(x, ax):
    if isinstance(x, FieldAtom):
        return FieldAtom(x.kind, x.point, x.scale + ax.point_scale, x.dirs)
    if isinstance(x, Cross):
        return Cross(_dilate_vt(x.left, ax), _dilate_vt(x.right, ax))
    return x


def apply_dilation(e: OpExpr, axioms: ScalingAxiom = DEFAULT_AXIOMS, *,
                   coulomb_to_alpha: bool = True, include_self_energy: bool = False) -> OpExpr:
    """Conjugate ``e`` by the dilation Γ, recording every power of μ as a grade.

    Coulomb factors ``1/|v|`` gain one power of μ; with ``coulomb_to_alpha`` the
    accompanying ``e²/4πε₀`` is rewritten as ``αħc``.  The flagged self-energy
    atom is dropped unless ``include_self_energy`` is set.
    """
    e = canonicalize(e)
    reg = e.registry
    rewrite = None
    out = []
    for t in e.terms:
        g = 0
        coef = t.coef
        factors = []
        skip = False
        for f in t.factors:
            if isinstance(f, Dot):
                g += _vt_grade(f.left, axioms) + _vt_grade(f.right, axioms)
                factors.append(Dot(_dilate_vt(f.left, axioms), _dilate_vt(f.right, axioms)))
            elif isinstance(f, InverseNorm):
                g += axioms.inverse_norm
                if coulomb_to_alpha:
                    if rewrite is None:
                        ensure_constants(reg)
                        rewrite = reg.parse("4*pi*eps0*hbar*c*alpha/e**2")
                    coef = coef.map(lambda c: c * rewrite)
                factors.append(f)
            elif isinstance(f, Named):
                if f.name not in axioms.named:
                    raise DilationError(f"no dilation rule for named atom {f.name!r}")
                if f.name == "SelfEnergy" and not include_self_energy:
                    skip = True
                g += axioms.named[f.name]
                factors.append(f)
            else:
                raise DilationError(f"no dilation rule for factor {f!r}")
        if not skip:
            out.append(OpTerm(coef.shift(g), factors, t.herm))
    return canonicalize(OpExpr(reg, out))
