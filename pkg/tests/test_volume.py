from fractions import Fraction

import pytest
import sympy
from hypothesis import given

from avf.errors import InputError, NotTangentError
from avf.families import affine_space, nu1, s_family_instances, s_spanning_fields, torus_chart
from avf.parsing import parse_polynomial, parse_rational
from avf.derivations import VectorField
from avf.volume import (
    ChartField,
    VolumeChart,
    chart_bracket,
    check_divergence_identities,
    divergence,
    field_divergence,
    restrict_to_chart,
)

from conftest import polynomials, to_sympy

X, Y = sympy.symbols("x y")


def _sympy_chart_div(cf, unit):
    a, b = (to_sympy(c) for c in cf.coeffs)
    return sympy.cancel(sympy.diff(a, X) + sympy.diff(b, Y) + (a * sympy.diff(unit, X) + b * sympy.diff(unit, Y)) / unit)


def test_nu1_restriction_and_divergence(S, torus):
    cf = restrict_to_chart(nu1(S), torus)
    assert cf.coeffs[0] == parse_rational("(1-x)/y", S.vars)
    assert cf.coeffs[1] == parse_rational("-(1-y)/x", S.vars)
    assert divergence(cf).is_zero()
    first = ChartField(torus, [cf.coeffs[0], 0])
    assert divergence(first) == parse_rational("-1/(x*y)", S.vars)


def test_divergence_matches_sympy_formula(S, torus):
    for f in s_spanning_fields(S) + [nu1(S).scale("x"), nu1(S).scale("y*z")]:
        cf = restrict_to_chart(f, torus)
        assert sympy.simplify(to_sympy(divergence(cf)) - _sympy_chart_div(cf, 1 / (X * Y))) == 0


def test_family_instances_are_divergence_free(S, torus):
    for f in s_family_instances(S, 3):
        assert field_divergence(f, torus).is_zero(), f.name


def test_x_nu1_has_nonzero_divergence(S, torus):
    d = field_divergence(nu1(S).scale("x"), torus)
    assert not d.is_zero()
    assert d == torus.to_chart(parse_polynomial("1+x*z", S.vars))


def test_unit_change_rule(S, torus):
    # div_{g u}(v) = div_u(v) + v(g)/g
    g = parse_rational("x+2", S.vars)
    other = torus.with_unit(torus.unit * g)
    cf = restrict_to_chart(nu1(S).scale("x"), torus)
    cf2 = restrict_to_chart(nu1(S).scale("x"), other)
    assert divergence(cf2, other) == divergence(cf, torus) + cf.apply(g) / g


def test_standard_chart_divergence_is_trace():
    C2 = affine_space(2)
    std = VolumeChart.standard(C2)
    v = VectorField(C2, ["x1^2*x2", "3*x2 - x1"])
    assert field_divergence(v, std) == parse_rational("2*x1*x2 + 3", C2.vars)


chart_polys = polynomials(vars=("x", "y"), max_degree=2, max_terms=3)


@given(chart_polys, chart_polys, chart_polys, chart_polys, chart_polys)
def test_divergence_identities(a, b, c, d, f):
    C2 = affine_space(2, prefix="")
    ring = affine_space(2)
    chart = VolumeChart(ring, ring.vars, {}, "1/(x1*x2)")
    ren = {"x": "x1", "y": "x2"}

    def conv(p):
        return parse_rational(str(p).replace("x", "x1").replace("y", "x2"), ring.vars) if not p.is_zero() else 0

    v = ChartField(chart, [conv(a), conv(b)])
    w = ChartField(chart, [conv(c), conv(d)])
    rep = check_divergence_identities(v, w, conv(f) if not f.is_zero() else 1, chart)
    assert rep.ok, rep.details


def test_chart_bracket_divergence_free(S, torus):
    a, b = (restrict_to_chart(f, torus) for f in s_spanning_fields(S)[:2])
    assert divergence(chart_bracket(a, b)).is_zero()


def test_chart_rejects_bad_substitution(S):
    with pytest.raises(InputError):
        VolumeChart(S, ("x", "y"), {"z": "1/(x*y)"}, "1/(x*y)")


def test_restriction_rejects_non_tangent(S, torus):
    from avf.families import s_printed_third_field

    with pytest.raises(NotTangentError):
        restrict_to_chart(s_printed_third_field(S), torus)
