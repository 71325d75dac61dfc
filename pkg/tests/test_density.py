import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from avf.derivations import VectorField, tangency_check
from avf.density import (
    LieClosure,
    TransitivityPlanner,
    apply_stages,
    closure_member,
    closure_span,
    compatibility_check,
    compatibility_report,
    lagrange_selector,
    perturb_to_separated,
    semi_compatibility_evidence,
    separation_violation,
)
from avf.errors import InputError, SeparationError
from avf.families import (
    S_INTEGRALS,
    affine_space,
    c2_closure_generators,
    monomials_in,
    nu1,
    partial,
    s_closure_generators,
    s_spanning_fields,
    sl2_pair,
)
from avf.integrability import to_mpf
from avf.algebra import Polynomial

PTS = [(Fraction(1, 2), Fraction(1, 3), Fraction(1)), (Fraction(2), Fraction(3), Fraction(-2, 3)),
       (Fraction(-1), Fraction(2), Fraction(0))]
TARGET = (Fraction(13, 25), Fraction(37, 120), Fraction(515, 481))


@pytest.fixture(scope="module")
def s_stages(S):
    return list(zip(s_spanning_fields(S), S_INTEGRALS))


@pytest.fixture(scope="module")
def s_closure(S):
    return LieClosure(max_degree=3, depth=3).fit(s_closure_generators(S, 3))


# -- compatible pairs


def test_sl2_semi_compatibility(SL2):
    d1, d2 = sl2_pair(SL2)
    ev = semi_compatibility_evidence(d1, d2, monomials_in(SL2.vars, ("a1", "a2"), 3),
                                     monomials_in(SL2.vars, ("b1", "b2"), 3), 1, 3)
    assert ev.ok and ev.monomials_verified == len(SL2.standard_monomials(3))
    assert "bounded" in ev.note


def test_semi_compatibility_reports_gaps(SL2):
    d1, d2 = sl2_pair(SL2)
    ev = semi_compatibility_evidence(d1, d2, ["a1"], ["b1"], 1, 2)
    assert not ev.ok and "1" in ev.failures


def test_semi_compatibility_rejects_non_kernel_element(SL2):
    d1, d2 = sl2_pair(SL2)
    with pytest.raises(InputError):
        semi_compatibility_evidence(d1, d2, ["b1"], ["b1"], 1, 2)


def test_compatibility_lnd_pair(SL2):
    d1, d2 = sl2_pair(SL2)
    cc = compatibility_check(d1, d2, "a1*b2")
    assert cc.ok and cc.mode == "LND+LND" and cc.condition2 and cc.degrees == (1, 1)
    assert compatibility_report(d1, d2, "a1*b2", ["a1", "a2", "a1*a2"], ["b1", "b2"], 1, 1).check.ok


def test_compatibility_witness_failure(SL2):
    d1, d2 = sl2_pair(SL2)
    cc = compatibility_check(d1, d2, "a1")
    assert not cc.ok


def test_compatibility_semisimple_mode():
    C2 = affine_space(2)
    sigma = VectorField(C2, ["0", "1"])  # d/dx2
    delta = VectorField(C2, ["x1", "0"])  # x1 d/dx1, semisimple
    cc = compatibility_check(sigma, delta, "x2")
    assert cc.mode == "LND+semisimple" and cc.ok and cc.condition1


def test_compatibility_rejects_non_lnd_sigma():
    C2 = affine_space(2)
    with pytest.raises(InputError):
        compatibility_check(VectorField(C2, ["x1", "0"]), VectorField(C2, ["0", "1"]), "x1")


# -- closure


def test_c2_closure_contains_all_x2_multiples():
    C2 = affine_space(2)
    est = LieClosure(max_degree=3, depth=2).fit(c2_closure_generators(C2, 3))
    targets = [partial(C2, "x2", h) for h in monomials_in(C2.vars, C2.vars, 3)]
    assert est.predict(targets).all()
    v = est.membership(partial(C2, "x2", Polynomial.monomial((2, 1), C2.vars)))
    assert v.member and v.coordinates


def test_closure_basis_fields_are_tangent_and_divergence_free(S, torus, s_closure):
    assert len(s_closure.basis_) >= len(s_closure_generators(S, 3))
    for v in s_closure.basis_.spanned:
        assert tangency_check(v).ok
    assert all(d.is_zero() for d in s_closure.divergences(torus))


def test_x_nu1_excluded_by_divergence(S, torus, s_closure):
    v = s_closure.membership(nu1(S).scale("x"), torus)
    assert v.verdict == "not-in-span" and "divergence" in v.obstruction
    # without a chart there is no obstruction, only a bounded negative
    assert s_closure.membership(nu1(S).scale("x")).obstruction is None


def test_closure_degree_overflow_is_inconclusive(S, s_closure):
    v = s_closure.membership(nu1(S).scale("x^3"))
    assert v.verdict == "inconclusive"


def test_closure_permutation_stable(S):
    gens = s_closure_generators(S, 3)
    a = closure_span(gens, 3, 2)
    shuffled = list(gens)
    random.Random(1).shuffle(shuffled)
    b = closure_span(shuffled, 3, 2)
    assert len(a) == len(b)
    for v in b.spanned:
        assert closure_member(a, v).member
    for v in a.spanned:
        assert closure_member(b, v).member


def test_closure_estimator_api(S):
    est = LieClosure(max_degree=2, depth=1)
    assert est.get_params() == {"max_degree": 2, "depth": 1}
    with pytest.raises(NotFittedError):
        est.membership(nu1(S))
    c = clone(est).set_params(depth=0)
    assert c.depth == 0 and not hasattr(c, "basis_")
    with pytest.raises(InputError):
        LieClosure().fit([])


# -- transitivity


def test_lagrange_selector():
    p = lagrange_selector([Fraction(2), Fraction(-1)], Fraction(1, 2))
    assert p.evaluate([Fraction(1, 2)]) == 1
    assert p.evaluate([Fraction(2)]) == 0 and p.evaluate([Fraction(-1)]) == 0


def test_plan_fixes_points_and_hits_target(S, s_stages):
    planner = TransitivityPlanner(s_stages, tol=1e-9).fit(PTS, TARGET)
    plan = planner.plan_
    assert plan.converged and plan.residual <= 1e-9
    assert plan.fixed_point_property()
    assert [tuple(i) for i in plan.images[1:]] == PTS[1:]
    with mpmath.workprec(256):
        assert all(to_mpf(r) <= 1e-12 for r in plan.surface_residuals)
    moved = planner.transform([PTS[0]])[0]
    assert max(abs(to_mpf(a) - to_mpf(b)) for a, b in zip(moved, TARGET)) <= 1e-9


def test_plan_estimator_params(s_stages):
    p = TransitivityPlanner(s_stages, tol=1e-6)
    assert p.get_params()["tol"] == 1e-6
    with pytest.raises(NotFittedError):
        p.transform(PTS)


def test_separation_violation_raises(S, s_stages):
    pts = [PTS[0], (Fraction(2), Fraction(-1, 3), Fraction(1))]
    assert separation_violation([(s, S.normal_form(f)) for s, f in s_stages], pts) == (0, 0, 1)
    with pytest.raises(SeparationError) as e:
        TransitivityPlanner(s_stages).fit(pts, TARGET)
    assert e.value.stage == 0 and e.value.pair == (0, 1)


def test_perturb_resolves_collision(S, s_stages):
    pts = [PTS[0], (Fraction(2), Fraction(-1, 3), Fraction(1))]
    res = perturb_to_separated(s_stages, pts)
    prepared = [(s, S.normal_form(f)) for s, f in s_stages]
    assert separation_violation(prepared, res.points) is None
    assert res.moves and res.points[1] == pts[1]


def test_plan_rejects_non_integral(S):
    with pytest.raises(InputError, match="first integral"):
        TransitivityPlanner([(s_spanning_fields(S)[0], "x")]).fit(PTS, TARGET)


def test_plan_rejects_point_off_surface(s_stages):
    with pytest.raises(InputError):
        TransitivityPlanner(s_stages).fit([(1, 1, 1)] + PTS[1:], TARGET)
