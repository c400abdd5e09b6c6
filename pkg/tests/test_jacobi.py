from __future__ import annotations

from dataclasses import replace

import pytest

from conftest import jac
from mpqed.jacobi import (
    FrameError,
    PartitionTree,
    TreeError,
    build_scheme,
    check_invariants,
    transform,
)
from mpqed.pzw import ParticleSystem, build_multipolar, build_zero_order
from mpqed.scaling import scale_hamiltonian
from mpqed.symkernel import InverseNorm, Registry, VecExpr, dot, equals, inv_norm, named

HYDROGEN_TREE = [1, 2, 2, "left-right"]
HELIUM_TREE = [[1, 2, 2, "right-left"], 3, 3, "right-left"]
LITHIUM_TREE = [[[1, 2, 2, "left-right"], 3, 3, "right-left"], 4, 4, "right-left"]


def vec(reg, *items):
    """``vec(reg, ("m2/(m1 + m2)", "R", 2), ...)``"""
    out = VecExpr.zero(reg)
    for c, kind, j in items:
        out = out + jac(reg, kind, j) * reg.parse(c)
    return out


@pytest.fixture
def lithium():
    return ParticleSystem((1, 1, 1, -3), ("m1", "m1", "m1", "m4"), 4, registry=Registry("li"))


def test_hydrogen_rows(hydrogen):
    reg = hydrogen.registry
    J = build_scheme(HYDROGEN_TREE, hydrogen.masses, reg)
    assert J.lab_position(1) == vec(reg, ("1", "R", 1), ("m2/(m1 + m2)", "R", 2))
    assert J.lab_position(2) == vec(reg, ("1", "R", 1), ("-m1/(m1 + m2)", "R", 2))
    assert J.lab_momentum(1) == vec(reg, ("m1/(m1 + m2)", "P", 1), ("1", "P", 2))
    assert J.effective_masses[2] == reg.parse("m1*m2/(m1 + m2)")


def test_helium_nucleus_row(helium):
    reg = helium.registry
    J = build_scheme(HELIUM_TREE, helium.masses, reg)
    assert J.lab_position(3) == vec(reg, ("1", "R", 1), ("2*m1/(2*m1 + m3)", "R", 3))
    assert J.lab_momentum(3) == vec(reg, ("m3/(2*m1 + m3)", "P", 1), ("1", "P", 3))


def test_lithium_third_electron_row(lithium):
    # exact inversion gives +2/3 R3 for the third electron
    reg = lithium.registry
    J = build_scheme(LITHIUM_TREE, lithium.masses, reg)
    r3 = J.lab_position(3)
    assert r3.coeff(jac(reg, "R", 3).terms[0][0]) == reg.parse("2/3")
    assert r3 == vec(reg, ("1", "R", 1), ("-m4/(3*m1 + m4)", "R", 4), ("2/3", "R", 3))


def test_hydrogen_zero_order_in_jacobi_frame(hydrogen):
    reg = hydrogen.registry
    J = build_scheme(HYDROGEN_TREE, hydrogen.masses, reg)
    hs = scale_hamiltonian(build_multipolar(hydrogen))
    h0 = hs.groups["kinetic"] + hs.groups["coulomb_ne"] + hs.groups["free_field"]
    expected = (dot(jac(reg, "P", 1), jac(reg, "P", 1), coef=reg.parse("1/(2*(m1 + m2))"))
                + dot(jac(reg, "P", 2), jac(reg, "P", 2), coef=reg.parse("(m1 + m2)/(2*m1*m2)"))
                + inv_norm(jac(reg, "R", 2), coef=reg.parse("-hbar*c"))
                + named("H_f", registry=reg))
    assert equals(transform(h0, J), expected)


def test_round_trip(helium):
    J = build_scheme(HELIUM_TREE, helium.masses, helium.registry)
    h0 = build_zero_order(helium)
    assert equals(transform(transform(h0, J), J, "to_lab"), h0)


def test_helium_coulomb_denominators(helium):
    reg = helium.registry
    J = build_scheme(HELIUM_TREE, helium.masses, reg)
    h = transform(build_multipolar(helium).groups["coulomb_ne"]
                  + build_multipolar(helium).groups["coulomb_ee"], J)
    args = sorted(t.factors[0].arg.sign_normalized()[1].sexpr for t in h.terms
                  if isinstance(t.factors[0], InverseNorm))
    expected = sorted(v.sign_normalized()[1].sexpr for v in (
        vec(reg, ("1", "R", 2)), vec(reg, ("1", "R", 3), ("1/2", "R", 2)),
        vec(reg, ("1", "R", 3), ("-1/2", "R", 2))))
    assert args == expected


def test_mixed_frames_are_rejected(hydrogen):
    reg = hydrogen.registry
    J = build_scheme(HYDROGEN_TREE, hydrogen.masses, reg)
    with pytest.raises(FrameError):
        transform(dot(hydrogen.r(1), jac(reg, "R", 2)), J)
    with pytest.raises(FrameError):
        transform(dot(jac(reg, "R", 2), jac(reg, "R", 2)), J, "to_jacobi")


@pytest.mark.parametrize("tree,system", [(HYDROGEN_TREE, "hydrogen"), (HELIUM_TREE, "helium"),
                                         (LITHIUM_TREE, "lithium")])
def test_invariants_hold(tree, system, request):
    s = request.getfixturevalue(system)
    rep = check_invariants(build_scheme(tree, s.masses, s.registry))
    assert rep.ok, list(rep.lines())
    assert set(rep.results) == {"inverse", "canonical", "kinetic", "moment_of_inertia"}


def test_corrupted_matrix_fails_kinetic(hydrogen):
    reg = hydrogen.registry
    J = build_scheme(HYDROGEN_TREE, hydrogen.masses, reg)
    bad = [row[:] for row in J.momentum_forward]
    bad[0][1] = bad[0][1] + reg.one()
    rep = check_invariants(replace(J, momentum_forward=bad))
    ok, residual = rep.results["kinetic"]
    assert not ok
    assert not residual.is_zero()
    assert rep.results["inverse"][0]


@pytest.mark.parametrize("tree", [
    [1, 1, 2],                       # repeated leaf
    [1, 2, 3],                       # index out of range
    [[1, 2, 2], 3, 2],               # duplicate index
    [1, 2, 2, "up-down"],            # unknown sign
    [1, 2, 1],                       # index 1 is the centroid
    [1, "x", 2],
])
def test_malformed_trees(tree):
    with pytest.raises(TreeError):
        PartitionTree.from_nested(tree).validate()


def test_zero_mass_cluster():
    reg = Registry("zero")
    reg.symbols("m1", "mass")
    with pytest.raises(TreeError):
        build_scheme([1, 2, 2], ("m1", "0"), reg)
