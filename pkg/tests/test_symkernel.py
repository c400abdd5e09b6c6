from __future__ import annotations

from fractions import Fraction

import pytest

from conftest import field_at_r1, jac
from mpqed.symkernel import (
    Dot,
    InverseNorm,
    Mom,
    OpExpr,
    Pos,
    RatFunc,
    Registry,
    RegistryMismatchError,
    ScalarExpr,
    SexprError,
    UnknownSymbolError,
    VecExpr,
    add,
    canonicalize,
    commutes,
    dot,
    dumps,
    equals,
    inv_norm,
    loads,
    multiply,
    named,
    scalar,
    substitute,
    term,
)
from mpqed.symkernel.operators import _distribute


@pytest.fixture
def eR2E(hydrogen):
    reg = hydrogen.registry
    return dot(jac(reg, "R", 2), field_at_r1(reg), coef=reg.rf("e"), grade=1)


# -- scalars ------------------------------------------------------------------------
def test_ratfunc_normalizes_common_factors(reg):
    reg.symbols("a b", "mass")
    x = reg.parse("(a**2 - b**2)/(a - b)")
    assert x == reg.parse("a + b")
    assert str(reg.parse("2/4")) == "1/2"


def test_definitions_are_macros(reg):
    reg.symbols("m1 m2", "mass")
    reg.define("M", "m1 + m2")
    assert reg.parse("M/M") == reg.one()
    assert reg.parse("m1/M + m2/M") == reg.one()


def test_unknown_symbol_suggests_neighbours(reg):
    reg.symbols("m1 m2", "mass")
    with pytest.raises(UnknownSymbolError) as info:
        reg.parse("m3 + 1")
    assert "m1" in info.value.suggestions or "m2" in info.value.suggestions


def test_registries_do_not_mix():
    a, b = Registry("a"), Registry("b")
    a.symbol("x")
    b.symbol("x")
    with pytest.raises(RegistryMismatchError):
        a.rf("x") + b.rf("x")


def test_scalar_expr_grades(reg):
    reg.symbol("x")
    s = ScalarExpr(reg, {1: reg.rf("x"), 3: reg.one()})
    assert s.grades() == [1, 3]
    assert (s - s).is_zero()
    assert s.shift(2).grades() == [3, 5]


def test_const_is_exact(reg):
    assert reg.const(Fraction(1, 3)) * 3 == reg.one()


# -- add ----------------------------------------------------------------------------
def test_add_zero_is_identity(eR2E):
    assert equals(eR2E + OpExpr.zero(eR2E.registry), eR2E)


def test_add_cancellation_gives_empty(eR2E):
    assert (eR2E + (-eR2E)).terms == ()


def test_add_merges_coefficients(eR2E):
    reg = eR2E.registry
    twice = add(eR2E, eR2E)
    assert len(twice.terms) == 1
    assert twice.terms[0].coef == ScalarExpr(reg, {1: reg.parse("2*e")})


# -- multiply -----------------------------------------------------------------------
def test_multiply_by_unit(eR2E):
    assert equals(multiply(eR2E, OpExpr.one(eR2E.registry)), eR2E)


def test_multiply_keeps_factor_order(hydrogen):
    reg = hydrogen.registry
    roentgen = dot(jac(reg, "P", 1), field_at_r1(reg, "B"))
    coulomb = inv_norm(jac(reg, "R", 2))
    prod = multiply(roentgen, coulomb)
    assert len(prod.terms) == 1
    assert [type(f) for f in prod.terms[0].factors] == [Dot, InverseNorm]


def test_square_of_two_terms_distributes_to_four(hydrogen):
    reg = hydrogen.registry
    x = dot(jac(reg, "P", 2), jac(reg, "P", 2)) + inv_norm(jac(reg, "R", 2))
    assert len(_distribute(x, x)) == 4
    # P2^2 and 1/|R2| do not commute, so both mixed orders survive
    assert len(multiply(x, x).terms) == 4


def test_products_of_hermitian_marked_terms_are_rejected(hydrogen):
    reg = hydrogen.registry
    h = dot(jac(reg, "P", 1), field_at_r1(reg, "A"), herm=True)
    with pytest.raises(ValueError):
        multiply(h, dot(jac(reg, "R", 2), jac(reg, "R", 2)))


# -- commutes -----------------------------------------------------------------------
def test_conjugate_pair_does_not_commute(hydrogen):
    reg = hydrogen.registry
    assert not commutes(Dot(Mom(2, "jac"), Mom(2, "jac")), InverseNorm(jac(reg, "R", 2)))


def test_independent_indices_commute(helium):
    reg = helium.registry
    assert commutes(Dot(Mom(2, "jac"), Mom(2, "jac")), InverseNorm(jac(reg, "R", 3)))


def test_field_point_mentions_r1(hydrogen):
    reg = hydrogen.registry
    assert not commutes(Dot(Mom(1, "jac"), Mom(1, "jac")), Dot(Mom(1, "jac"), field_at_r1(reg, "B")))


# -- canonicalize ---------------------------------------------------------------------
def test_cross_antisymmetry(hydrogen):
    reg = hydrogen.registry
    R2, B = jac(reg, "R", 2), field_at_r1(reg, "B")
    P1 = jac(reg, "P", 1)
    s = dot(P1, R2.cross(VecExpr.atom(B, reg))) + dot(P1, VecExpr.atom(B, reg).cross(R2))
    assert s.is_zero()


def test_commuting_factors_are_sorted(helium):
    reg = helium.registry
    a = Dot(Pos(2, "jac"), Pos(3, "jac"))
    b = Dot(Pos(3, "jac"), Pos(3, "jac"))
    one = term(1, [a, b], registry=reg)
    two = term(1, [b, a], registry=reg)
    assert dumps(one) == dumps(two)


def test_conjugate_product_keeps_order(hydrogen):
    reg = hydrogen.registry
    x = Dot(Mom(2, "jac"), Mom(2, "jac"))
    y = Dot(Pos(2, "jac"), Pos(2, "jac"))
    assert not commutes(x, y)
    assert not equals(term(1, [x, y], registry=reg), term(1, [y, x], registry=reg))


def test_canonicalize_is_idempotent(eR2E):
    once = canonicalize(eR2E + eR2E)
    assert dumps(canonicalize(once)) == dumps(once)


# -- equals -------------------------------------------------------------------------
def test_equals_reflexive(eR2E):
    assert equals(eR2E, eR2E)


def test_equals_after_rational_normalization(hydrogen, eR2E):
    reg = hydrogen.registry
    reg.define("M", "m1 + m2")
    c = reg.parse("e*m1/M + e*m2/M")
    other = dot(jac(reg, "R", 2), field_at_r1(reg), coef=c, grade=1)
    assert equals(eR2E, other)


def test_hermitian_marker_is_structural(hydrogen):
    reg = hydrogen.registry
    t = dot(jac(reg, "P", 1), field_at_r1(reg, "A"))
    assert not equals(t, dot(jac(reg, "P", 1), field_at_r1(reg, "A"), herm=True))


# -- substitute -----------------------------------------------------------------------
def test_identity_substitution(eR2E):
    assert equals(substitute(eR2E, {}), eR2E)


def test_hydrogen_relative_coordinate(hydrogen):
    reg = hydrogen.registry
    M = reg.parse("m1 + m2")
    R1, R2 = jac(reg, "R", 1), jac(reg, "R", 2)
    mapping = {Pos(1): R1 + R2 * (reg.rf("m2") / M), Pos(2): R1 - R2 * (reg.rf("m1") / M)}
    rel = hydrogen.r(1) - hydrogen.r(2)
    e = dot(rel, rel)
    assert equals(substitute(e, mapping), dot(R2, R2))
    # e(r1 - R) - e(r2 - R) -> e R2
    d = (hydrogen.relative(1) - hydrogen.relative(2)) * reg.rf("e")
    assert d.subs(mapping) == R2 * reg.rf("e")


# -- serialization ---------------------------------------------------------------------
def test_round_trip(eR2E):
    assert equals(loads(dumps(eR2E), eR2E.registry), eR2E)


def test_round_trip_of_hermitian_and_named(hydrogen):
    reg = hydrogen.registry
    e = (dot(jac(reg, "P", 1), jac(reg, "R", 2).cross(VecExpr.atom(field_at_r1(reg, "B"), reg)),
             coef=reg.parse("e/(2*m1)"), grade=2, herm=True)
         + named("H_f", registry=reg) + scalar(reg.parse("hbar*c"), registry=reg))
    assert equals(loads(dumps(e), reg), e)


def test_malformed_nesting_reports_position(hydrogen):
    text = '(op\n  (term (coef (g 1 "e")) (herm 0) (dot (pos jac 2) (pos jac 2))'
    with pytest.raises(SexprError) as info:
        loads(text, hydrogen.registry)
    assert info.value.line == 2


def test_unknown_symbol_in_text(hydrogen):
    text = '(op (term (coef (g 1 "ee")) (herm 0) (dot (pos jac 2) (pos jac 2))))'
    with pytest.raises(SexprError) as info:
        loads(text, hydrogen.registry)
    assert info.value.col > 1
    assert "e" in info.value.suggestions


def test_ratfunc_is_hashable(reg):
    reg.symbol("x")
    assert len({reg.parse("x/x"), reg.one(), reg.parse("2*x/(2*x)")}) == 1
    assert isinstance(reg.one(), RatFunc)
