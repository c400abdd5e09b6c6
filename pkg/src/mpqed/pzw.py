"""Multipolar (PZW) and minimal-coupling Hamiltonians of a neutral N-body system."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .constants import LAMBDA, LAMBDA2, coulomb_constant, ensure_constants
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
    RatFunc,
    Registry,
    ScalarExpr,
    VecExpr,
    canonicalize,
    default_registry,
)

__all__ = [
    "ParticleSystem",
    "LambdaPolynomial",
    "Hamiltonian",
    "NonNeutralError",
    "build_zero_order",
    "build_multipolar",
    "build_minimal_coupling",
    "interaction_lambda_terms",
    "LambdaTerm",
    "magnetic_weight",
    "GROUPS_MP",
    "GROUPS_MC",
]


class NonNeutralError(ValueError):
    """The multipolar form needs a vanishing total charge."""


@dataclass(frozen=True)
class ParticleSystem:
    """Charges in units of ``e`` and mass symbol names, one entry per particle.

    Equal masses are expressed by sharing a symbol (``("m1", "m1", "m3")``).
    """

    charges: tuple
    masses: tuple
    nucleus: int = 1
    Z: int | None = None
    spins: tuple | None = None
    name: str = "system"
    registry: Registry = field(default_factory=default_registry, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "charges", tuple(int(q) for q in self.charges))
        object.__setattr__(self, "masses", tuple(str(m) for m in self.masses))
        n = len(self.charges)
        if n < 1:
            raise ValueError("a system needs at least one particle")
        if len(self.masses) != n:
            raise ValueError(f"{n} charges but {len(self.masses)} masses")
        if not 1 <= self.nucleus <= n:
            raise ValueError(f"nucleus index {self.nucleus} out of range 1..{n}")
        if self.spins is None:
            object.__setattr__(self, "spins", (True,) * n)
        else:
            object.__setattr__(self, "spins", tuple(bool(s) for s in self.spins))
            if len(self.spins) != n:
                raise ValueError("spins must have one flag per particle")
        if self.Z is None:
            object.__setattr__(self, "Z", abs(self.charges[self.nucleus - 1]) or 1)
        if self.Z <= 0:
            raise ValueError("Z must be a positive integer")
        reg = ensure_constants(self.registry)
        for m in self.masses:
            reg.symbol(m, "mass")

    @property
    def N(self) -> int:
        return len(self.charges)

    @property
    def neutral(self) -> bool:
        return sum(self.charges) == 0

    def mass(self, a: int) -> RatFunc:
        return self.registry.rf(self.masses[a - 1])

    def charge(self, a: int) -> RatFunc:
        """``e_a`` as a rational function (``q_a * e``)."""
        return self.registry.rf("e") * self.charges[a - 1]

    def total_mass(self) -> RatFunc:
        tot = self.registry.zero()
        for a in range(1, self.N + 1):
            tot = tot + self.mass(a)
        return tot

    def r(self, a: int) -> VecExpr:
        return VecExpr.atom(Pos(a, "lab"), self.registry)

    def p(self, a: int) -> VecExpr:
        return VecExpr.atom(Mom(a, "lab"), self.registry)

    def center_of_mass(self) -> VecExpr:
        """``R = Σ m_a r_a / M``."""
        reg = self.registry
        M = self.total_mass()
        return VecExpr(reg, [(Pos(a, "lab"), self.mass(a) / M) for a in range(1, self.N + 1)])

    def relative(self, a: int) -> VecExpr:
        """``r_a - R``."""
        return self.r(a) - self.center_of_mass()

    def dipole(self) -> VecExpr:
        """``Σ e_a (r_a - R)``."""
        out = VecExpr.zero(self.registry)
        for a in range(1, self.N + 1):
            out = out + self.relative(a) * self.charge(a)
        return out


@dataclass(frozen=True)
class LambdaPolynomial:
    """Polynomial ``Σ_k c_k λ^k`` with rational-function coefficients."""

    coeffs: tuple
    var: str = LAMBDA

    @classmethod
    def from_ratfunc(cls, value: RatFunc, var: str = LAMBDA) -> "LambdaPolynomial":
        parts = value.poly_in(var)
        deg = max(parts) if parts else 0
        reg = value.registry
        return cls(tuple(parts.get(k, reg.zero()) for k in range(deg + 1)), var)

    def to_ratfunc(self, registry=None) -> RatFunc:
        reg = registry or (self.coeffs[0].registry if self.coeffs else default_registry())
        lam = reg.rf(self.var)
        out = reg.zero()
        for k, c in enumerate(self.coeffs):
            out = out + c * lam ** k
        return out

    @property
    def degree(self) -> int:
        nz = [k for k, c in enumerate(self.coeffs) if not c.is_zero()]
        return max(nz) if nz else 0

    def __mul__(self, other: "LambdaPolynomial") -> "LambdaPolynomial":
        if self.var != other.var:
            raise ValueError("cannot multiply polynomials in different variables")
        reg = self.coeffs[0].registry
        out = [reg.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return LambdaPolynomial(tuple(out), self.var)

    def shift(self, n: int) -> "LambdaPolynomial":
        """Multiply by ``λ**n``."""
        reg = self.coeffs[0].registry
        return LambdaPolynomial((reg.zero(),) * n + self.coeffs, self.var)


def magnetic_weight(s: ParticleSystem, a: int, b: int, var: str = LAMBDA) -> LambdaPolynomial:
    """``λ δ_ab - (m_a/M)(λ - 1)`` as a polynomial in λ."""
    reg = s.registry
    ratio = s.mass(a) / s.total_mass()
    lin = (reg.one() if a == b else reg.zero()) - ratio
    return LambdaPolynomial((ratio, lin), var)


@dataclass(frozen=True)
class LambdaTerm:
    """One λ-parameterized coupling: ``weight(λ) * coef * vector . F(point)``."""

    kind: str  # "electric" or "magnetic"
    a: int
    b: int
    weight: LambdaPolynomial
    vector: VecExpr
    point: VecExpr


def interaction_lambda_terms(s: ParticleSystem, var: str = LAMBDA) -> list:
    """λ-form of the polarization and magnetization couplings.

    Electric: per particle ``a``, ``e_a (r_a - R) . Π(R + λ(r_a - R))/ε₀`` with
    weight 1.  Magnetic: per pair ``(a, b)`` the weight of :func:`magnetic_weight`
    and the vector ``e_b (r_b - R)`` crossed into ``B(R + λ(r_b - R))``.
    """
    if not s.neutral:
        raise NonNeutralError(f"{s.name}: total charge {sum(s.charges)} != 0")
    reg = s.registry
    lam = reg.rf(var)
    R = s.center_of_mass()
    one = LambdaPolynomial((reg.one(),), var)
    out = []
    for a in range(1, s.N + 1):
        if s.charges[a - 1] == 0:
            continue
        rel = s.relative(a)
        out.append(LambdaTerm("electric", a, a, one, rel * s.charge(a), R + rel * lam))
    for a in range(1, s.N + 1):
        for b in range(1, s.N + 1):
            if s.charges[b - 1] == 0:
                continue
            rel = s.relative(b)
            out.append(LambdaTerm("magnetic", a, b, magnetic_weight(s, a, b, var),
                                  rel * s.charge(b), R + rel * lam))
    return out


GROUPS_MP = ("kinetic", "coulomb_ne", "free_field", "coulomb_ee", "electric",
             "paramagnetic", "spin", "diamagnetic", "self_energy")
GROUPS_MC = ("kinetic", "coulomb_ne", "free_field", "coulomb_ee", "pA", "spin", "AA")


@dataclass
class Hamiltonian:
    """Named groups of terms.  Group expressions may carry λ variables under ∫₀¹dλ."""

    system: ParticleSystem
    scheme: str
    groups: dict
    integrated: tuple = (LAMBDA, LAMBDA2)
    flagged: tuple = ("self_energy",)

    def total(self, include_flagged: bool = False) -> OpExpr:
        out = OpExpr.zero(self.system.registry)
        for name, g in self.groups.items():
            if name in self.flagged and not include_flagged:
                continue
            out = out + g
        return out

    def map(self, fn) -> "Hamiltonian":
        return Hamiltonian(self.system, self.scheme,
                           {k: fn(v) for k, v in self.groups.items()},
                           self.integrated, self.flagged)

    def nonempty(self):
        return [k for k, v in self.groups.items() if v.terms]


def _scalar(reg, value, grade=0) -> ScalarExpr:
    return ScalarExpr(reg, {grade: value})


def _op(reg, terms) -> OpExpr:
    return canonicalize(OpExpr(reg, terms))


def _kinetic(s):
    reg = s.registry
    return _op(reg, [OpTerm(_scalar(reg, reg.one() / (s.mass(a) * 2)),
                            [Dot(Mom(a), Mom(a))]) for a in range(1, s.N + 1)])


def _coulomb(s, nucleus_pairs: bool):
    reg = s.registry
    k = coulomb_constant(reg)
    terms = []
    for a in range(1, s.N + 1):
        for b in range(a + 1, s.N + 1):
            qq = s.charges[a - 1] * s.charges[b - 1]
            if qq == 0:
                continue
            involves = s.nucleus in (a, b)
            if involves != nucleus_pairs:
                continue
            terms.append(OpTerm(_scalar(reg, k * qq), [InverseNorm(s.r(a) - s.r(b))]))
    return _op(reg, terms)


def _free_field(s):
    reg = s.registry
    return _op(reg, [OpTerm(_scalar(reg, reg.one()), [Named("H_f")])])


def _spin(s):
    """``-Σ M_a . B(r_a)``."""
    reg = s.registry
    terms = [OpTerm(_scalar(reg, -reg.one()), [Dot(Moment(a), FieldAtom("B", s.r(a)))])
             for a in range(1, s.N + 1) if s.spins[a - 1] and s.charges[a - 1]]
    return _op(reg, terms)


def build_zero_order(s: ParticleSystem) -> OpExpr:
    """Kinetic energy, nucleus-particle Coulomb attraction and ``H_f``."""
    return _kinetic(s) + _coulomb(s, True) + _free_field(s)


def _theta_cross_b(s, a, var):
    """``∫Θ_a ∧ B`` as a VecExpr (λ left symbolic in ``var``)."""
    reg = s.registry
    items = []
    for t in interaction_lambda_terms(s, var):
        if t.kind != "magnetic" or t.a != a:
            continue
        w = t.weight.to_ratfunc(reg)
        B = FieldAtom("B", t.point)
        for x, c in t.vector.terms:
            items.append((Cross(x, B), c * w))
    return VecExpr(reg, items)


def build_multipolar(s: ParticleSystem) -> Hamiltonian:
    """The expanded multipolar Hamiltonian, grouped by coupling type.

    λ and λ' remain symbolic; every group is understood under ``∫₀¹dλ (∫₀¹dλ')``.
    The paramagnetic cross term is stored as ``(1/2m_a)[p_a . X_a + h.c.]`` and the
    diamagnetic square as a product of two independent λ-integrals.
    """
    if not s.neutral:
        raise NonNeutralError(f"{s.name}: total charge {sum(s.charges)} != 0")
    reg = s.registry
    groups = {
        "kinetic": _kinetic(s),
        "coulomb_ne": _coulomb(s, True),
        "free_field": _free_field(s),
        "coulomb_ee": _coulomb(s, False),
    }
    eps0 = reg.rf("eps0")
    el = []
    for t in interaction_lambda_terms(s):
        if t.kind != "electric":
            continue
        Pi = FieldAtom("Pi", t.point)
        for x, c in t.vector.terms:
            el.append(OpTerm(_scalar(reg, c / eps0), [Dot(x, Pi)]))
    groups["electric"] = _op(reg, el)
    para, dia = [], []
    for a in range(1, s.N + 1):
        X = _theta_cross_b(s, a, LAMBDA)
        if not X.terms:
            continue
        half = reg.one() / (s.mass(a) * 2)
        for x, c in X.terms:
            para.append(OpTerm(_scalar(reg, c * half), [Dot(Mom(a), x)], herm=True))
        X2 = _theta_cross_b(s, a, LAMBDA2)
        for x, c in X.terms:
            for y, d in X2.terms:
                dia.append(OpTerm(_scalar(reg, c * d * half), [Dot(x, y)]))
    groups["paramagnetic"] = _op(reg, para)
    groups["spin"] = _spin(s)
    groups["diamagnetic"] = _op(reg, dia)
    charged = any(s.charges)
    groups["self_energy"] = _op(reg, [OpTerm(_scalar(reg, reg.one()), [Named("SelfEnergy")])]
                                if charged else [])
    return Hamiltonian(s, "mp", groups)


def build_minimal_coupling(s: ParticleSystem) -> Hamiltonian:
    """``Σ (p_a - e_a A(r_a))²/2m_a`` expanded, plus Coulomb, spin and ``H_f``.

    The cross term is ``-(e_a/2m_a)[p_a . A(r_a) + h.c.]``.
    """
    reg = s.registry
    pa, aa = [], []
    for a in range(1, s.N + 1):
        if s.charges[a - 1] == 0:
            continue
        A = FieldAtom("A", s.r(a))
        ea = s.charge(a)
        m2 = s.mass(a) * 2
        pa.append(OpTerm(_scalar(reg, -ea / m2), [Dot(Mom(a), A)], herm=True))
        aa.append(OpTerm(_scalar(reg, ea * ea / m2), [Dot(A, A)]))
    groups = {
        "kinetic": _kinetic(s),
        "coulomb_ne": _coulomb(s, True),
        "free_field": _free_field(s),
        "coulomb_ee": _coulomb(s, False),
        "pA": _op(reg, pa),
        "spin": _spin(s),
        "AA": _op(reg, aa),
    }
    return Hamiltonian(s, "mc", groups, flagged=())


def system_from_lists(charges: Sequence[int], masses: Sequence[str], **kw) -> ParticleSystem:
    return ParticleSystem(tuple(charges), tuple(masses), **kw)
