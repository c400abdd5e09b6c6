from __future__ import annotations

from fractions import Fraction

import pytest
import sympy

from conftest import field_at_r1, jac
from mpqed.fields import (
    DEFAULT_AXIOMS,
    DilationError,
    ScalingAxiom,
    TaylorError,
    apply_dilation,
    expand_fields,
    taylor_expand,
)
from mpqed.pzw import build_zero_order
from mpqed.symkernel import (
    FieldAtom, InverseNorm, Pos, ScalarExpr, VecExpr, dot, dumps, named, scalar,
)

X, Y, Z = sympy.symbols("x y z")
COORDS = sympy.Matrix([X, Y, Z])
# a cubic test field: its Taylor series terminates at third order
F_TEST = X**3 - 2 * X * Y * Z + Y**2 + 3 * Z - 5 * X * Y**2 + 1
POINTS = {Pos(1, "lab"): (1, 2, -1), Pos(2, "lab"): (-3, 1, 4),
          Pos(1, "jac"): (2, -1, 1), Pos(2, "jac"): (0, 3, -2)}
MASSES = {"m1": sympy.Rational(1), "m2": sympy.Rational(1836)}


def numeric(v: VecExpr):
    out = sympy.zeros(3, 1)
    for t, c in v.terms:
        out += sympy.Matrix(POINTS[t]) * c.to_sympy().subs(MASSES)
    return out


def directional(f, d, n):
    for _ in range(n):
        f = sum(d[i] * sympy.diff(f, COORDS[i]) for i in range(3))
    return f


def series_value(terms, center):
    c = numeric(center)
    total = 0
    for n, w, atom in terms:
        g = F_TEST
        for x, mult in atom.dirs:
            g = directional(g, numeric(x), mult)
        total += sympy.Rational(w.numerator, w.denominator) * g.subs(dict(zip((X, Y, Z), c)))
    return total


def test_order_zero_is_the_field_at_the_center(hydrogen):
    reg = hydrogen.registry
    atom = FieldAtom("E", jac(reg, "R", 1) + jac(reg, "R", 2), 1)
    out = taylor_expand(atom, 0)
    assert len(out) == 1
    n, w, a = out[0]
    assert (n, w) == (0, 1)
    assert a == field_at_r1(reg)


def test_first_order_about_center_of_mass(hydrogen):
    R = hydrogen.center_of_mass()
    atom = FieldAtom("E", hydrogen.r(1), 1)
    n, w, a = taylor_expand(atom, 1, R)[1]
    assert (n, w) == (1, 1)
    assert a.dirs == ((hydrogen.relative(1), 1),)


def test_lambda_squared_over_two_without_sign(hydrogen):
    reg = hydrogen.registry
    lam = reg.rf("lam")
    point = jac(reg, "R", 1) - jac(reg, "R", 2) * lam
    e = dot(jac(reg, "R", 2), FieldAtom("E", point, 1))
    second = expand_fields(e, 2).grade(2)
    assert len(second.terms) == 1
    t = second.terms[0]
    assert t.coef == ScalarExpr(reg, {2: reg.parse("lam**2/2")})
    assert t.factors[0].right.dirs[0][1] == 2


@pytest.mark.parametrize("a", [1, 2])
def test_series_reproduces_polynomial_field(hydrogen, a):
    # first-principles oracle: exact directional derivatives of a cubic
    R = hydrogen.center_of_mass()
    lam = hydrogen.registry.rf("lam")
    atom = FieldAtom("E", R - hydrogen.relative(a) * lam, 1)
    for lam_value in (sympy.Rational(1, 3), sympy.Rational(-2, 5)):
        MASSES["lam"] = lam_value
        try:
            terms = taylor_expand(atom, 3, R)
            exact = F_TEST.subs(dict(zip((X, Y, Z), numeric(atom.point))))
            assert sympy.simplify(series_value(terms, R) - exact) == 0
        finally:
            MASSES.pop("lam")


def test_point_must_be_affine_about_center(hydrogen):
    atom = FieldAtom("E", hydrogen.r(1) * 2, 1)
    with pytest.raises(TaylorError):
        taylor_expand(atom, 1, hydrogen.center_of_mass())


def test_point_needs_one_power_of_mu(hydrogen):
    with pytest.raises(TaylorError):
        taylor_expand(FieldAtom("E", hydrogen.r(1), 0), 1, hydrogen.center_of_mass())


# -- dilation -----------------------------------------------------------------------------
def test_axioms_from_solved_exponents():
    ax = ScalingAxiom.from_exponents(1, 2)
    assert ax == DEFAULT_AXIOMS
    assert ax.field_prefactor == {"E": 4, "B": 4, "Pi": 4, "A": 2}
    assert ax.point_scale == 1
    assert ax.named["H_f"] == 2


def test_non_integral_grades_are_rejected():
    with pytest.raises(ValueError):
        ScalingAxiom.from_exponents(2, 3)


def test_free_field_gains_mu_squared(hydrogen):
    reg = hydrogen.registry
    out = apply_dilation(named("H_f", registry=reg))
    assert dumps(out) == '(op (term (coef (g 2 "1")) (herm 0) (named H_f)))'


def test_coulomb_becomes_z_alpha_hbar_c(helium):
    # zero order holds the two nucleus attractions; e-e repulsion is its own group
    out = apply_dilation(build_zero_order(helium))
    coulomb = [t for t in out.terms if t.factors and isinstance(t.factors[0], InverseNorm)]
    assert [str(t.coef.at(1)) for t in coulomb] == ["-2*alpha*c*hbar"] * 2
    assert all(t.coef.grades() == [1] for t in coulomb)


def test_pure_number_is_unchanged(hydrogen):
    reg = hydrogen.registry
    x = scalar(reg.const(Fraction(3, 7)), registry=reg)
    assert apply_dilation(x) == x


def test_field_argument_is_dilated(hydrogen):
    e = dot(hydrogen.r(1), FieldAtom("E", hydrogen.r(1), 0))
    out = apply_dilation(e)
    t = out.terms[0]
    assert t.coef.grades() == [3]  # mu^4 from E, mu^-1 from the position
    assert t.factors[0].right.scale == 1


def test_differentiated_fields_have_no_dilation_rule(hydrogen):
    reg = hydrogen.registry
    atom = FieldAtom("E", hydrogen.r(1), 0, ((jac(reg, "R", 2), 1),))
    with pytest.raises(DilationError):
        apply_dilation(dot(hydrogen.r(1), atom))
