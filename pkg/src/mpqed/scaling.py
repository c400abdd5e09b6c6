"""Scaling constants and the scaled (μ-graded) Hamiltonians."""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import sympy

from .constants import ensure_constants
from .fields import ScalingAxiom, apply_dilation
from .pzw import Hamiltonian
from .symkernel import OpExpr, OpTerm, ScalarExpr, canonicalize

__all__ = [
    "ScalingConstraint",
    "ScalingSolution",
    "ScalingError",
    "DEFAULT_CONSTRAINT",
    "solve_scaling",
    "scale_hamiltonian",
    "substitute_alpha",
    "ZERO_ORDER_GROUPS",
]

VARIABLES = ("mu", "eta")
BASE = "Zalpha"
ZERO_ORDER_GROUPS = ("kinetic", "coulomb_ne", "free_field")


class ScalingError(ValueError):
    """Inconsistent or underdetermined scaling constraints."""

    def __init__(self, message, rank=None, unknowns=len(VARIABLES)):
        self.rank = rank
        self.unknowns = unknowns
        if rank is not None:
            message = f"{message} (rank {rank} of {unknowns} unknowns)"
        super().__init__(message)


_MONO = re.compile(r"^\s*(?:\(?\s*([A-Za-z_]\w*)\s*\)?\s*(?:(?:\*\*|\^)\s*(-?\d+))?)\s*$")


def _parse_monomial(text: str) -> dict:
    out: dict = {}
    for factor in re.split(r"\*(?!\*)", text.replace("**", "^")):
        factor = factor.strip()
        if not factor or factor == "1":
            continue
        m = _MONO.match(factor)
        if not m:
            raise ValueError(f"cannot read monomial factor {factor!r}")
        name, exp = m.group(1), int(m.group(2) or 1)
        if name not in VARIABLES + (BASE,):
            raise ValueError(f"unknown scaling variable {name!r}; use mu, eta, Zalpha")
        out[name] = out.get(name, 0) + exp
    return out


@dataclass(frozen=True)
class ScalingConstraint:
    """Monomial equations among μ, η and Zα, e.g. ``mu^2 = Zalpha*mu = eta``."""

    equations: tuple

    @classmethod
    def parse(cls, *chains: str) -> "ScalingConstraint":
        eqs = []
        for chain in chains:
            sides = [_parse_monomial(p) for p in chain.split("=")]
            if len(sides) < 2:
                raise ValueError(f"no '=' in {chain!r}")
            eqs.extend(zip(sides, sides[1:]))
        return cls(tuple(eqs))


DEFAULT_CONSTRAINT = ScalingConstraint.parse("mu^2 = Zalpha*mu = eta")


@dataclass(frozen=True)
class ScalingSolution:
    """Exponents with ``μ = (Zα)**mu`` and ``η = (Zα)**eta``."""

    mu: Fraction
    eta: Fraction

    @property
    def eta_over_mu(self) -> Fraction:
        return self.eta - self.mu

    def axioms(self) -> ScalingAxiom:
        return ScalingAxiom.from_exponents(self.mu, self.eta)

    def describe(self) -> str:
        def pw(q):
            return "Z*alpha" if q == 1 else f"(Z*alpha)^{q}"
        return f"mu = {pw(self.mu)}, eta = {pw(self.eta)}, eta/mu = {pw(self.eta_over_mu)}"


def solve_scaling(c: ScalingConstraint = DEFAULT_CONSTRAINT) -> ScalingSolution:
    """Solve the exponent equations exactly; reject rank-deficient or inconsistent systems."""
    rows, rhs = [], []
    for lhs, rhs_m in c.equations:
        row = [lhs.get(v, 0) - rhs_m.get(v, 0) for v in VARIABLES]
        rows.append(row)
        rhs.append(rhs_m.get(BASE, 0) - lhs.get(BASE, 0))
    if not rows:
        raise ScalingError("no equations", 0)
    A = sympy.Matrix(rows)
    b = sympy.Matrix(rhs)
    rank = A.rank()
    aug = A.row_join(b).rank()
    if aug > rank:
        raise ScalingError("inconsistent scaling constraints", rank)
    if rank < len(VARIABLES):
        raise ScalingError("underdetermined scaling constraints", rank)
    sol, params = A.gauss_jordan_solve(b)
    vals = [Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in sol]
    if any(v <= 0 for v in vals):
        raise ScalingError(f"non-positive exponents {vals}; dilations must be > 0", rank)
    return ScalingSolution(*vals)


def substitute_alpha(e: OpExpr, Z: int, mu_exp: Fraction = Fraction(1)) -> OpExpr:
    """Replace ``α`` by ``μ^(1/mu_exp) / Z`` (each power of α becomes a grade)."""
    step = Fraction(1) / Fraction(mu_exp)
    if step.denominator != 1:
        raise ScalingError(f"alpha = mu^{step}/Z is not an integral grading")
    step = int(step)
    reg = e.registry
    out = []
    for t in canonicalize(e).terms:
        parts: dict = {}
        for g in t.coef.grades():
            for k, c in t.coef.at(g).poly_in("alpha").items():
                gg = g + k * step
                val = c / reg.const(Fraction(Z) ** k)
                parts[gg] = parts[gg] + val if gg in parts else val
        out.append(OpTerm(ScalarExpr(reg, parts), t.factors, t.herm))
    return canonicalize(OpExpr(reg, out))


def _scale_expr(e, Z, sol, include_self_energy):
    d = apply_dilation(e, sol.axioms(), include_self_energy=include_self_energy)
    return substitute_alpha(d, Z, sol.mu).shift(-2)


def scale_hamiltonian(h, scheme: str | None = None, solution: ScalingSolution | None = None,
                      Z: int | None = None, include_self_energy: bool = False):
    """Dilate, express α through μ and divide out the global μ².

    Accepts a :class:`Hamiltonian` (returns one, group by group) or a bare
    OpExpr (then ``Z`` is required).  For a Hamiltonian the zero-order groups
    are checked to land on grade 0.
    """
    if solution is None:
        solution = solve_scaling()
    if isinstance(h, OpExpr):
        if Z is None:
            raise ValueError("Z is required to scale a bare expression")
        ensure_constants(h.registry)
        return _scale_expr(h, Z, solution, include_self_energy)
    if scheme is not None and scheme not in (h.scheme, {"mp": "multipolar", "mc": "minimal"}[h.scheme]):
        raise ValueError(f"scheme {scheme!r} does not match Hamiltonian built for {h.scheme!r}")
    Z = h.system.Z if Z is None else Z
    groups = {}
    for name, g in h.groups.items():
        if name == "self_energy" and not include_self_energy:
            groups[name] = OpExpr.zero(g.registry)
            continue
        groups[name] = _scale_expr(g, Z, solution, include_self_energy)
    for name in ZERO_ORDER_GROUPS:
        g = groups.get(name)
        if g is not None and g.terms and g.grades() != [0]:
            raise ScalingError(f"zero-order group {name!r} landed on grades {g.grades()}")
    return Hamiltonian(h.system, h.scheme, groups, h.integrated, h.flagged)
