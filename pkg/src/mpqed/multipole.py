"""Graded multipole families and the interaction hierarchy.

Two independent routes produce the hierarchy:

* :func:`assemble_hierarchy` builds each family ``T_X^n`` from its closed form
  (λ-weights via :func:`lambda_integrate`) and sums them with the signs of the
  scaled Hamiltonian;
* :func:`expand` runs build -> scale -> Jacobi -> Taylor -> ∫dλ on the whole
  Hamiltonian and sorts the result by grade.

The test-suite checks that the two agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from .constants import LAMBDA, LAMBDA2
from .fields import expand_fields
from .jacobi import JacobiScheme, transform
from .pzw import (
    Hamiltonian,
    LambdaPolynomial,
    ParticleSystem,
    build_minimal_coupling,
    build_multipolar,
    magnetic_weight,
)
from .scaling import ScalingSolution, scale_hamiltonian, solve_scaling
from .symkernel import (
    Cross,
    Dot,
    FieldAtom,
    Mom,
    Moment,
    OpExpr,
    OpTerm,
    RatFunc,
    ScalarExpr,
    VecExpr,
    canonicalize,
)

__all__ = [
    "GradedFamily",
    "FAMILY_OFFSETS",
    "lambda_integrate",
    "integrate_lambdas",
    "electric_family",
    "spin_family",
    "magnetic_family",
    "diamagnetic_family",
    "pA_family",
    "AA_family",
    "assemble_hierarchy",
    "hierarchy_signs",
    "Expansion",
    "expand",
    "coulomb_gauge_symmetrize",
]

FAMILY_OFFSETS = {"E": 1, "S": 2, "M": 2, "MM": 4, "A": 1, "AA": 2}


@dataclass
class GradedFamily:
    """``entries[n]`` is ``T_tag^n`` with its μ-grade stripped (grade 0)."""

    tag: str
    entries: dict = field(default_factory=dict)

    @property
    def offset(self) -> int:
        return FAMILY_OFFSETS[self.tag]

    def at_grade(self, g: int):
        return self.entries.get(g - self.offset)


# -- λ integration -------------------------------------------------------------------
def lambda_integrate(p, var: str = LAMBDA):
    """Exact ``∫₀¹ p(λ) dλ`` by the power rule.

    Accepts a :class:`LambdaPolynomial` (returns a grade-0 ScalarExpr) or a
    RatFunc polynomial in ``var`` (returns a RatFunc).
    """
    if isinstance(p, LambdaPolynomial):
        reg = p.coeffs[0].registry
        out = reg.zero()
        for k, c in enumerate(p.coeffs):
            out = out + c / (k + 1)
        return ScalarExpr(reg, {0: out})
    if isinstance(p, RatFunc):
        if var not in p.free_symbols():
            return p
        out = p.registry.zero()
        for k, c in p.poly_in(var).items():
            out = out + c / (k + 1)
        return out
    raise TypeError(f"cannot integrate {type(p).__name__}")


def integrate_lambdas(e: OpExpr, variables=(LAMBDA, LAMBDA2)) -> OpExpr:
    """Integrate every coefficient over each λ variable on [0, 1]."""
    def integ(c):
        for v in variables:
            c = lambda_integrate(c, v)
        return c
    return e.map_coeffs(integ)


# -- closed-form families ------------------------------------------------------------
def _frame(s: ParticleSystem, scheme: JacobiScheme | None):
    """Center of the expansion and a map lab-expression -> output frame."""
    if scheme is None:
        return s.center_of_mass(), (lambda e: e)
    return s.center_of_mass(), (lambda e: transform(e, scheme, "to_jacobi"))


def _dfield(kind, center, x, n):
    return FieldAtom(kind, center, 1, ((x, n),) if n else ())


def _sc(reg, v):
    return ScalarExpr(reg, {0: v})


def electric_family(s: ParticleSystem, nmax: int, scheme: JacobiScheme | None = None,
                    ) -> GradedFamily:
    """``T_E^n = Σ_a e_a (r_a-R) . ((r_a-R).∇)ⁿ/(n+1)! Π/ε₀ |_{μR}``."""
    reg = s.registry
    center, out_frame = _frame(s, scheme)
    eps0 = reg.rf("eps0")
    fam = GradedFamily("E")
    for n in range(nmax + 1):
        w = lambda_integrate(LambdaPolynomial((reg.one(),)).shift(n)).at(0) / factorial(n)
        terms = []
        for a in range(1, s.N + 1):
            if not s.charges[a - 1]:
                continue
            x = s.relative(a)
            Pi = _dfield("Pi", center, x, n)
            for v, c in x.terms:
                terms.append(OpTerm(_sc(reg, c * s.charge(a) * w / eps0), [Dot(v, Pi)]))
        fam.entries[n] = out_frame(canonicalize(OpExpr(reg, terms)))
    return fam


def spin_family(s: ParticleSystem, nmax: int, scheme: JacobiScheme | None = None) -> GradedFamily:
    """``T_S^n = Σ_a M_a . ((r_a-R).∇)ⁿ/n! B |_{μR}`` (no alternating sign)."""
    reg = s.registry
    center, out_frame = _frame(s, scheme)
    fam = GradedFamily("S")
    for n in range(nmax + 1):
        terms = []
        for a in range(1, s.N + 1):
            if not (s.spins[a - 1] and s.charges[a - 1]):
                continue
            B = _dfield("B", center, s.relative(a), n)
            terms.append(OpTerm(_sc(reg, reg.one() / factorial(n)), [Dot(Moment(a), B)]))
        fam.entries[n] = out_frame(canonicalize(OpExpr(reg, terms)))
    return fam


def _y_vector(s, a, k, center, var=LAMBDA, weight=True):
    """``Σ_b w_ab^k/k! e_b (r_b-R) ∧ ((r_b-R).∇)^k B`` as a VecExpr."""
    reg = s.registry
    items = []
    for b in range(1, s.N + 1):
        if not s.charges[b - 1]:
            continue
        w = lambda_integrate(magnetic_weight(s, a, b, var).shift(k)).at(0) if weight else reg.one()
        x = s.relative(b)
        B = _dfield("B", center, x, k)
        for v, c in x.terms:
            items.append((Cross(v, B), c * s.charge(b) * w / factorial(k)))
    return VecExpr(reg, items)


def magnetic_family(s: ParticleSystem, nmax: int, scheme: JacobiScheme | None = None,
                    ) -> GradedFamily:
    """``T_M^n = Σ_{a,b} w_ab^n e_b/(2 m_a n!) [p_a . ((r_b-R) ∧ ((r_b-R).∇)ⁿ B) + h.c.]``."""
    reg = s.registry
    center, out_frame = _frame(s, scheme)
    fam = GradedFamily("M")
    for n in range(nmax + 1):
        terms = []
        for a in range(1, s.N + 1):
            half = reg.one() / (s.mass(a) * 2)
            for v, c in _y_vector(s, a, n, center).terms:
                terms.append(OpTerm(_sc(reg, c * half), [Dot(Mom(a), v)], herm=True))
        fam.entries[n] = out_frame(canonicalize(OpExpr(reg, terms)))
    return fam


def diamagnetic_family(s: ParticleSystem, nmax: int, scheme: JacobiScheme | None = None,
                       lambda_mode: str = "independent") -> GradedFamily:
    """``T_MM^n = Σ_a 1/(2m_a) Σ_{k+l=n} Y_a^k . Y_a^l``.

    ``lambda_mode="independent"`` squares the λ-integral (two integration
    variables); ``"shared"`` integrates the squared integrand over one λ.
    """
    if lambda_mode not in ("independent", "shared"):
        raise ValueError("lambda_mode must be 'independent' or 'shared'")
    reg = s.registry
    center, out_frame = _frame(s, scheme)
    fam = GradedFamily("MM")
    for n in range(nmax + 1):
        terms = []
        for a in range(1, s.N + 1):
            half = reg.one() / (s.mass(a) * 2)
            for k in range(n + 1):
                l = n - k
                if lambda_mode == "independent":
                    Yk = _y_vector(s, a, k, center)
                    Yl = _y_vector(s, a, l, center)
                    for u, cu in Yk.terms:
                        for v, cv in Yl.terms:
                            terms.append(OpTerm(_sc(reg, cu * cv * half), [Dot(u, v)]))
                    continue
                for b in range(1, s.N + 1):
                    for d in range(1, s.N + 1):
                        if not (s.charges[b - 1] and s.charges[d - 1]):
                            continue
                        wb = magnetic_weight(s, a, b).shift(k)
                        wd = magnetic_weight(s, a, d).shift(l)
                        w = lambda_integrate(wb * wd).at(0) / (factorial(k) * factorial(l))
                        xb, xd = s.relative(b), s.relative(d)
                        Bk = _dfield("B", center, xb, k)
                        Bl = _dfield("B", center, xd, l)
                        for u, cu in xb.terms:
                            for v, cv in xd.terms:
                                coef = cu * cv * s.charge(b) * s.charge(d) * w * half
                                terms.append(OpTerm(_sc(reg, coef),
                                                    [Dot(Cross(u, Bk), Cross(v, Bl))]))
        fam.entries[n] = out_frame(canonicalize(OpExpr(reg, terms)))
    return fam


def pA_family(s: ParticleSystem, nmax: int, scheme: JacobiScheme | None = None) -> GradedFamily:
    """``T_A^n = Σ_a e_a/(2 m_a n!) [p_a . ((r_a-R).∇)ⁿ A |_{μR} + h.c.]``."""
    reg = s.registry
    center, out_frame = _frame(s, scheme)
    fam = GradedFamily("A")
    for n in range(nmax + 1):
        terms = []
        for a in range(1, s.N + 1):
            if not s.charges[a - 1]:
                continue
            A = _dfield("A", center, s.relative(a), n)
            c = s.charge(a) / (s.mass(a) * 2 * factorial(n))
            terms.append(OpTerm(_sc(reg, c), [Dot(Mom(a), A)], herm=True))
        fam.entries[n] = out_frame(canonicalize(OpExpr(reg, terms)))
    return fam


def AA_family(s: ParticleSystem, nmax: int, scheme: JacobiScheme | None = None) -> GradedFamily:
    """``T_AA^n = Σ_a e_a²/2m_a Σ_l (D_a^{n-l} A/(n-l)!) . (D_a^l A/l!)``."""
    reg = s.registry
    center, out_frame = _frame(s, scheme)
    fam = GradedFamily("AA")
    for n in range(nmax + 1):
        terms = []
        for a in range(1, s.N + 1):
            if not s.charges[a - 1]:
                continue
            x = s.relative(a)
            for l in range(n + 1):
                c = s.charge(a) ** 2 / (s.mass(a) * 2 * factorial(n - l) * factorial(l))
                terms.append(OpTerm(_sc(reg, c), [Dot(_dfield("A", center, x, n - l),
                                                      _dfield("A", center, x, l))]))
        fam.entries[n] = out_frame(canonicalize(OpExpr(reg, terms)))
    return fam


def hierarchy_signs(scheme: str) -> dict:
    """Sign of each family in the scaled Hamiltonian."""
    if scheme in ("mp", "multipolar"):
        return {"E": 1, "S": -1, "M": 1, "MM": 1}
    if scheme in ("mc", "minimal"):
        return {"A": -1, "S": -1, "AA": 1}
    raise ValueError(f"unknown scheme {scheme!r}")


def families(s: ParticleSystem, scheme: str, order: int, jacobi: JacobiScheme | None = None,
             lambda_mode: str = "independent") -> dict:
    """All families needed up to grade ``order``."""
    out = {}
    for tag in hierarchy_signs(scheme):
        nmax = order - FAMILY_OFFSETS[tag]
        if nmax < 0:
            out[tag] = GradedFamily(tag)
            continue
        if tag == "E":
            out[tag] = electric_family(s, nmax, jacobi)
        elif tag == "S":
            out[tag] = spin_family(s, nmax, jacobi)
        elif tag == "M":
            out[tag] = magnetic_family(s, nmax, jacobi)
        elif tag == "MM":
            out[tag] = diamagnetic_family(s, nmax, jacobi, lambda_mode)
        elif tag == "A":
            out[tag] = pA_family(s, nmax, jacobi)
        else:
            out[tag] = AA_family(s, nmax, jacobi)
    return out


def assemble_hierarchy(s: ParticleSystem, scheme: str, order: int,
                       jacobi: JacobiScheme | None = None,
                       lambda_mode: str = "independent") -> dict:
    """Grade ``n`` -> ``Σ_X sign_X T_X^{n - offset_X}``, for ``1 <= n <= order``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    signs = hierarchy_signs(scheme)
    fams = families(s, scheme, order, jacobi, lambda_mode)
    reg = s.registry
    out = {}
    for g in range(1, order + 1):
        acc = OpExpr.zero(reg)
        for tag, sign in signs.items():
            entry = fams[tag].at_grade(g)
            if entry is not None and entry.terms:
                acc = acc + entry.scale(sign, grade=g)
        out[g] = acc
    return out


# -- whole-Hamiltonian pipeline -------------------------------------------------------
@dataclass
class Expansion:
    system: ParticleSystem
    scheme: str
    order: int
    solution: ScalingSolution
    h0: OpExpr
    grades: dict
    jacobi: JacobiScheme | None = None
    groups: dict = field(default_factory=dict)

    @property
    def mu_definition(self) -> str:
        Z = self.system.Z
        return "mu = alpha" if Z == 1 else f"mu = {Z}*alpha"


ZERO_ORDER = ("kinetic", "coulomb_ne", "free_field", "coulomb_ee")


def expand(s: ParticleSystem, scheme: str = "mp", order: int = 2,
           jacobi: JacobiScheme | None = None, include_self_energy: bool = False,
           solution: ScalingSolution | None = None) -> Expansion:
    """Full pipeline: build, scale, change frame, Taylor-expand, integrate over λ.

    The frame change is done before the Taylor expansion; substitution and
    expansion commute, and transforming first keeps the intermediate sums small.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    solution = solution or solve_scaling()
    h: Hamiltonian = build_multipolar(s) if scheme in ("mp", "multipolar") \
        else build_minimal_coupling(s)
    hs = scale_hamiltonian(h, solution=solution, include_self_energy=include_self_energy)
    reg = s.registry
    center = None if jacobi is not None else s.center_of_mass()
    h0 = OpExpr.zero(reg)
    inter = OpExpr.zero(reg)
    groups = {}
    for name, g in hs.groups.items():
        if not g.terms:
            continue
        if name not in ZERO_ORDER and min(min(t.coef.grades()) for t in g.terms) > order:
            continue
        if jacobi is not None:
            g = transform(g, jacobi, "to_jacobi")
        if name in ZERO_ORDER:
            groups[name] = g
            h0 = h0 + g
            continue
        g = integrate_lambdas(expand_fields(g, order, center))
        groups[name] = g
        inter = inter + g
    grades = {n: inter.grade(n) for n in range(1, order + 1)}
    return Expansion(s, "mp" if scheme in ("mp", "multipolar") else "mc", order, solution,
                     h0, grades, jacobi, groups)


def coulomb_gauge_symmetrize(e: OpExpr) -> OpExpr:
    """Use ``∇·A = 0`` to write ``c[p . A + h.c.]`` as ``2c p . A``.

    Only marked ``Dot(momentum, A)`` terms whose A carries no derivative are
    rewritten; the kernel never applies this on its own.
    """
    reg = e.registry
    out = []
    for t in canonicalize(e).terms:
        if (t.herm and len(t.factors) == 1 and isinstance(t.factors[0], Dot)
                and isinstance(t.factors[0].left, Mom)
                and isinstance(t.factors[0].right, FieldAtom)
                and t.factors[0].right.kind == "A" and not t.factors[0].right.dirs):
            out.append(OpTerm(t.coef * reg.const(2), t.factors, False))
        else:
            out.append(t)
    return canonicalize(OpExpr(reg, out))
