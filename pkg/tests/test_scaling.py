from __future__ import annotations

from fractions import Fraction

import pytest

from mpqed.pzw import build_minimal_coupling, build_multipolar
from mpqed.scaling import (
    DEFAULT_CONSTRAINT,
    ScalingConstraint,
    ScalingError,
    scale_hamiltonian,
    solve_scaling,
)
from mpqed.symkernel import InverseNorm, dot, equals


def grades_of(group):
    return sorted({g for t in group.terms for g in t.coef.grades()})


def test_default_constraint():
    sol = solve_scaling(DEFAULT_CONSTRAINT)
    assert (sol.mu, sol.eta, sol.eta_over_mu) == (1, 2, 1)
    assert sol.describe() == "mu = Z*alpha, eta = (Z*alpha)^2, eta/mu = Z*alpha"


def test_uncoupled_constraint_is_underdetermined():
    with pytest.raises(ScalingError) as info:
        solve_scaling(ScalingConstraint.parse("mu = eta"))
    assert info.value.rank == 1


def test_cubic_chain_gives_same_solution():
    sol = solve_scaling(ScalingConstraint.parse("mu^3 = Zalpha^2*mu", "mu^2 = eta"))
    assert (sol.mu, sol.eta) == (1, 2)


def test_inconsistent_constraints():
    with pytest.raises(ScalingError):
        solve_scaling(ScalingConstraint.parse("mu = Zalpha", "mu = Zalpha^2", "eta = mu"))


def test_fractional_exponents_are_exact():
    sol = solve_scaling(ScalingConstraint.parse("mu^2 = Zalpha", "eta = mu"))
    assert sol.mu == Fraction(1, 2)


def test_unknown_variable_is_rejected():
    with pytest.raises(ValueError):
        ScalingConstraint.parse("nu = eta")


def test_zero_order_lands_on_grade_zero(hydrogen):
    hs = scale_hamiltonian(build_multipolar(hydrogen))
    reg = hydrogen.registry
    for name in ("kinetic", "coulomb_ne", "free_field"):
        assert grades_of(hs.groups[name]) == [0]
    coulomb = hs.groups["coulomb_ne"].terms[0]
    assert isinstance(coulomb.factors[0], InverseNorm)
    assert coulomb.coef.at(0) == reg.parse("-hbar*c")


@pytest.mark.parametrize("group,grade", [("electric", 1), ("spin", 2), ("paramagnetic", 2),
                                         ("diamagnetic", 4)])
def test_multipolar_interaction_grades(hydrogen, group, grade):
    hs = scale_hamiltonian(build_multipolar(hydrogen))
    assert grades_of(hs.groups[group]) == [grade]


def test_minimal_interaction_grades(hydrogen):
    hs = scale_hamiltonian(build_minimal_coupling(hydrogen), scheme="minimal")
    assert grades_of(hs.groups["pA"]) == [1]
    assert grades_of(hs.groups["AA"]) == [2]


def test_electron_repulsion_carries_one_over_z(helium):
    hs = scale_hamiltonian(build_multipolar(helium))
    (t,) = hs.groups["coulomb_ee"].terms
    assert t.coef.at(0) == helium.registry.parse("hbar*c/2")


def test_self_energy_is_dropped_unless_requested(hydrogen):
    h = build_multipolar(hydrogen)
    assert scale_hamiltonian(h).groups["self_energy"].terms == ()
    assert scale_hamiltonian(h, include_self_energy=True).groups["self_energy"].terms


def test_scaling_is_additive(hydrogen):
    h = build_multipolar(hydrogen)
    a, b = h.groups["kinetic"], h.groups["spin"]
    Z = hydrogen.Z
    assert equals(scale_hamiltonian(a + b, Z=Z), scale_hamiltonian(a, Z=Z) + scale_hamiltonian(b, Z=Z))


def test_bare_expression_needs_z(hydrogen):
    with pytest.raises(ValueError):
        scale_hamiltonian(dot(hydrogen.p(1), hydrogen.p(1)))


def test_scheme_mismatch(hydrogen):
    with pytest.raises(ValueError):
        scale_hamiltonian(build_multipolar(hydrogen), scheme="minimal")
