from fractions import Fraction

import mpmath
import pytest
import sympy

from avf.algebra import Polynomial
from avf.checks import c3_shears, random_s_points, sl2_chart
from avf.derivations import VectorField
from avf.families import affine_space, nu1, s_spanning_fields, s_type1, s_type2, sl2_pair, torus_chart
from avf.integrability import (
    ExpPoly,
    KernelLinearCertificate,
    LNDCertificate,
    PolyAutomorphism,
    TriangularLinearCertificate,
    certify_flow,
    flow_evaluate,
    kernel_linear_certify,
    lnd_certify,
    lnd_degree,
    lnd_group_law,
    lnd_inverse_law,
    semisimple_weights,
    to_mpf,
    triangular_certify,
    verify_automorphism,
    verify_flow_volume,
)
from avf.volume import VolumeChart

C3 = affine_space(3)
S_POLY = Polynomial.var("s", ("s",))


def test_lnd_degree_basics(SL2):
    d1, d2 = sl2_pair(SL2)
    assert lnd_degree(d1, "a1*b2") == 1
    assert lnd_degree(d2, "a1*b2") == 1
    assert lnd_degree(d1, "a1") == 0
    assert lnd_degree(d1, "0") == -1
    assert lnd_degree(d1, "b1^3") == 3


def test_lnd_degree_recursion(SL2):
    d1, _ = sl2_pair(SL2)
    for f in ("b1^2*b2", "a2*b1 + b2^2", "b1*b2"):
        n = lnd_degree(d1, f)
        assert n >= 1 and lnd_degree(d1, d1.apply(f)) == n - 1


def test_lnd_degree_bound_exceeded():
    C1 = affine_space(1)
    v = VectorField(C1, ["x1"])
    assert lnd_degree(v, "x1", bound=10) is None
    assert lnd_certify(v, bound=10) is None
    assert semisimple_weights(v) == {"x1": 1}


def test_lnd_certificates_verify(SL2):
    for d in sl2_pair(SL2):
        cert = lnd_certify(d)
        assert isinstance(cert, LNDCertificate) and cert.verify(d)


@pytest.mark.parametrize("k", range(5))
def test_shear_flows_inverse_and_group_law(k):
    v = c3_shears(C3)[k]
    F = certify_flow(v)
    assert F.is_polynomial and lnd_inverse_law(F) and lnd_group_law(F)
    rep = verify_automorphism(F.at_time(Fraction(-3, 2)), VolumeChart.standard(C3))
    assert rep.ok and rep.jacobian_factor == 1


def test_shear_flow_matches_sympy_taylor():
    v = VectorField(C3, {"x1": "x2", "x2": "x3"})
    F = certify_flow(v)
    t, x1, x2, x3 = sympy.symbols("t x1 x2 x3")
    from conftest import to_sympy

    assert to_sympy(F.formulas[0].poly) == sympy.expand(x1 + x2 * t + x3 * t ** 2 / 2)


def test_sl2_flows_preserve_volume(SL2):
    chart = sl2_chart(SL2)
    for d in sl2_pair(SL2):
        rep = verify_automorphism(certify_flow(d).at_time(Fraction(5, 7)), chart)
        assert rep.ok


def test_automorphism_failure_is_reported(SL2):
    vars = SL2.vars
    a1, a2, b1, b2 = (Polynomial.var(v, vars) for v in vars)
    phi = PolyAutomorphism(SL2, (a1 * 2, a2, b1, b2), (a1 * Fraction(1, 2), a2, b1, b2))
    rep = verify_automorphism(phi)
    assert not rep.ok and "relations" in rep.failures


def test_kernel_linear_certificate_on_s(S):
    cert = kernel_linear_certify(s_spanning_fields(S)[1])
    assert isinstance(cert, KernelLinearCertificate)
    assert set(cert.linear) == {"x", "z"} and cert.invariant == ("y",)
    bad = kernel_linear_certify(s_type2(S, 1, 1, S_POLY))
    assert not bad and bad.unsatisfied


def test_triangular_certificate_for_weighted_lift(S):
    v = s_type2(S, 2, 1, S_POLY)
    cert = triangular_certify(v)
    assert isinstance(cert, TriangularLinearCertificate) and cert.verify(v)
    assert cert.order[-1] == "z"


def _ode_flow(v, p, t):
    """Independent numeric integration of x' = v(x)."""
    with mpmath.workdps(30):
        f = mpmath.odefun(lambda s, y: list(v.evaluate(y, to_mpf)), 0, [to_mpf(c) for c in p])
        return f(t)


@pytest.mark.parametrize("build", [
    lambda S: s_spanning_fields(S)[1],
    lambda S: s_spanning_fields(S)[2],
    lambda S: s_type1(S, "2*z"),
    lambda S: s_type2(S, 1, 1, S_POLY),
    lambda S: s_type2(S, 2, 1, S_POLY),
])
def test_flow_matches_numeric_ode(S, build):
    v = build(S)
    F = certify_flow(v)
    p = random_s_points(1, 11)[0]
    t = Fraction(1, 4)
    img = flow_evaluate(F, t, p, 128)
    ref = _ode_flow(v, p, to_mpf(t))
    with mpmath.workdps(30):
        for a, b in zip(img.coords, ref):
            assert abs(to_mpf(a) - b) < mpmath.mpf(10) ** -20
        assert img.residual < mpmath.mpf(10) ** -30


def test_kernel_linear_zero_branch_is_exact(S):
    # a_x = y vanishes at y = 0: the linear branch gives exact rationals
    F = certify_flow(s_spanning_fields(S)[1])
    img = flow_evaluate(F, Fraction(3), (Fraction(1), Fraction(0), Fraction(7)))
    assert img.exact and img.coords == (1, 0, 4)


def test_group_law_triangular(S):
    F = certify_flow(s_type2(S, 1, 1, S_POLY))
    p = random_s_points(1, 5)[0]
    s, t = Fraction(1, 3), Fraction(-2, 5)
    with mpmath.workprec(256):
        a = flow_evaluate(F, s, flow_evaluate(F, t, p).coords).coords
        b = flow_evaluate(F, s + t, p).coords
        assert max(abs(to_mpf(x) - to_mpf(y)) for x, y in zip(a, b)) < mpmath.mpf(2) ** -200


def test_exppoly_solution_matches_sympy():
    # v' = 2 v + t^2 e^{3t} + 5 t e^{2t} - 1, v(0) = 3
    rhs = ExpPoly({(3, 2): 1, (2, 1): 5, (0, 0): -1})
    sol = rhs.solve_linear(2, 3)
    t = sympy.Symbol("t")
    vf = sympy.Function("v")
    ode = sympy.Eq(vf(t).diff(t), 2 * vf(t) + t ** 2 * sympy.exp(3 * t) + 5 * t * sympy.exp(2 * t) - 1)
    ref = sympy.dsolve(ode, vf(t), ics={vf(0): 3}).rhs
    for tv in (Fraction(1, 3), Fraction(-2)):
        with mpmath.workdps(40):
            got = sol.at(tv)
            want = sympy.N(ref.subs(t, sympy.Rational(tv.numerator, tv.denominator)), 40)
            assert abs(got - mpmath.mpf(str(want))) < mpmath.mpf(10) ** -30


def test_exppoly_polynomial_case_is_exact():
    sol = ExpPoly({(0, 1): 2}).solve_linear(0, 1)  # v' = 2t
    assert sol.at(Fraction(3)) == 10


def test_no_flow_certificate_for_generic_field(S):
    assert certify_flow(VectorField(C3, ["x2^2", "x1^2", "0"])) is None


def test_numeric_volume_for_exp_flows(S, torus):
    for f in s_spanning_fields(S) + [s_type2(S, 1, 1, S_POLY)]:
        rep = verify_flow_volume(certify_flow(f), torus, Fraction(1, 2), samples=3, precision=128)
        assert rep.ok


def test_numeric_volume_detects_non_preserving_flow():
    C2 = affine_space(2)
    # x1 d/dx1 has divergence 1: its flow scales volume by e^t
    F = certify_flow(VectorField(C2, ["x1", "0"]))
    rep = verify_flow_volume(F, VolumeChart.standard(C2), Fraction(1, 2), samples=3, precision=128)
    assert not rep.ok
