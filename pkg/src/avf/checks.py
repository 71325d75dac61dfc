"""Named verification checks run by corpus items.

Each check takes a params dict and returns an :class:`Outcome`.  Witnesses
are JSON-ready and deterministic: exact values print as ``p/q``, numeric
ones through ``mpmath.nstr`` with a fixed digit count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable

import mpmath

from .algebra import Polynomial, as_rational_function
from .derivations import VectorField, bracket, kernel_member, span_at_point, tangency_check
from .density import (
    LieClosure,
    build_transitivity_plan,
    compatibility_check,
    perturb_to_separated,
    semi_compatibility_evidence,
    separation_violation,
)
from .errors import InputError
from .families import (
    S_INTEGRALS,
    affine_space,
    c2_closure_generators,
    monomials_in,
    nu1,
    partial,
    s_closure_generators,
    s_family_instances,
    s_printed_third_field,
    s_rational_point,
    s_spanning_fields,
    s_type2,
    sl2,
    sl2_pair,
    surface_s,
    torus_chart,
)
from .integrability import (
    DEFAULT_PRECISION,
    certify_flow,
    flow_evaluate,
    lnd_certify,
    lnd_degree,
    lnd_group_law,
    lnd_inverse_law,
    relation_residual,
    to_mpf,
    verify_automorphism,
    verify_flow_volume,
)
from .parsing import parse_polynomial, parse_rational
from .varieties import CoordinateRing, unit_ideal_certificate
from .volume import ChartField, VolumeChart, divergence, field_divergence, restrict_to_chart


@dataclass
class Outcome:
    verdict: str  # "pass", "fail", "inconclusive"
    witnesses: dict = field(default_factory=dict)
    tolerance: str = "exact"


def num(x) -> str:
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return mpmath.nstr(mpmath.mpf(x), 6)


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


CHECKS: dict[str, Callable[[dict], Outcome]] = {}


def check(name: str):
    def register(fn):
        CHECKS[name] = fn
        return fn
    return register


def random_polynomial(rnd: random.Random, vars, allowed, max_degree: int, terms: int = 4) -> Polynomial:
    monos = monomials_in(vars, allowed, max_degree)
    p = Polynomial.zero(vars)
    for m in rnd.sample(monos, min(terms, len(monos))):
        p = p + m * Fraction(rnd.randint(-9, 9), rnd.randint(1, 5))
    return p


def random_s_points(n: int, seed: int) -> list[tuple]:
    rnd = random.Random(seed)
    out = []
    while len(out) < n:
        x = Fraction(rnd.randint(-12, 12), rnd.randint(1, 6))
        y = Fraction(rnd.randint(-12, 12), rnd.randint(1, 6))
        if x * y != 0:
            out.append(s_rational_point(x, y))
    return out


# -- generic checks ------------------------------------------------------------


def _ring(params) -> CoordinateRing:
    from .io import resolve_variety

    return resolve_variety(params.get("variety", "S"))


@check("nf")
def check_nf(params) -> Outcome:
    ring = _ring(params)
    got = ring.normal_form(params["poly"])
    want = ring.poly(parse_polynomial(params["expected"], ring.vars))
    return Outcome(_verdict(got.rep == want), {"normal_form": str(got)})


@check("tangency")
def check_tangency(params) -> Outcome:
    ring = _ring(params)
    v = VectorField(ring, {k: parse_polynomial(c, ring.vars) for k, c in params["coeffs"].items()})
    res = tangency_check(v)
    w = {"values": [str(x) for x in res.values]}
    if res.ok:
        w["cofactors"] = [[str(h) for h in row] for row in res.cofactors]
    else:
        w["residuals"] = [str(r) for r in res.residuals]
    return Outcome(_verdict(res.ok), w)


@check("lnd-degree")
def check_lnd_degree(params) -> Outcome:
    ring = _ring(params)
    v = VectorField(ring, params["coeffs"]).certified()
    bound = params.get("bound", 64)
    d = lnd_degree(v, params["a"], bound)
    if d is None:
        return Outcome("inconclusive", {"degree": f"exceeded bound {bound}"})
    want = params.get("expected")
    return Outcome(_verdict(want is None or d == want), {"degree": d})


@check("unit-cert")
def check_unit_cert(params) -> Outcome:
    ring = _ring(params)
    gens = [parse_polynomial(g, ring.vars) for g in params["gens"]]
    cert = unit_ideal_certificate(gens, params.get("degree_bound", 4))
    if cert is None:
        return Outcome("inconclusive", {"certificate": f"none up to degree {params.get('degree_bound', 4)}"})
    return Outcome(_verdict(cert.verify()), {"cofactors": [str(c) for c in cert.cofactors]})


# -- criterion checks ----------------------------------------------------------


@check("bracket-identity")
def check_bracket_identity(params) -> Outcome:
    """[f1 d1, x1 f2 d2] - [x1 f1 d1, f2 d2] == f1 f2 d2 on C^3 for random
    f1 in Q[x2, x3], f2 in Q[x1, x3]."""
    ring = affine_space(3)
    x1, x2, x3 = ring.vars
    rnd = random.Random(params.get("seed", 0))
    n, deg = params.get("pairs", 50), params.get("max_degree", 4)
    X1 = Polynomial.var(x1, ring.vars)
    bad = []
    for k in range(n):
        f1 = random_polynomial(rnd, ring.vars, (x2, x3), deg)
        f2 = random_polynomial(rnd, ring.vars, (x1, x3), deg)
        lhs = bracket(partial(ring, x1, f1), partial(ring, x2, X1 * f2)) - bracket(
            partial(ring, x1, X1 * f1), partial(ring, x2, f2))
        if lhs != partial(ring, x2, f1 * f2):
            bad.append({"f1": str(f1), "f2": str(f2), "lhs": str(lhs)})
    return Outcome(_verdict(not bad), {"pairs": n, "max_degree": deg, "failures": bad})


@check("sl2-compatible-pair")
def check_sl2(params) -> Outcome:
    ring = sl2()
    d1, d2 = sl2_pair(ring)
    d = params.get("degree", 3)
    w = {}
    kern = {
        "delta1 kills a1, a2": all(kernel_member(d1, v) for v in ("a1", "a2")),
        "delta2 kills b1, b2": all(kernel_member(d2, v) for v in ("b1", "b2")),
    }
    w["kernels"] = kern
    c1, c2 = lnd_certify(d1), lnd_certify(d2)
    w["lnd_degrees"] = {"delta1": c1 and c1.degrees, "delta2": c2 and c2.degrees}
    degs = [lnd_degree(d1, "a1*b2"), lnd_degree(d2, "a1*b2")]
    w["deg(a1*b2)"] = degs
    k1 = monomials_in(ring.vars, ("a1", "a2"), d)
    k2 = monomials_in(ring.vars, ("b1", "b2"), d)
    ev = semi_compatibility_evidence(d1, d2, k1, k2, 1, d)
    w["semi_compatibility"] = {"monomials_verified": ev.monomials_verified, "failures": ev.failures,
                               "degree_bound": d, "note": ev.note}
    cc = compatibility_check(d1, d2, "a1*b2")
    w["compatibility"] = {"mode": cc.mode, "condition2": cc.condition2, "degrees": list(cc.degrees)}
    ok = (all(kern.values()) and c1 is not None and c2 is not None and degs == [1, 1]
          and ev.ok and cc.ok and cc.mode == "LND+LND" and cc.condition2)
    return Outcome(_verdict(ok), w)


@check("s-divergence")
def check_s_divergence(params) -> Outcome:
    ring = surface_s()
    chart = torus_chart(ring)
    vars = ring.vars
    w = {}
    n1 = nu1(ring)
    r = restrict_to_chart(n1, chart)
    expected = ChartField(chart, [parse_rational("(1-x)/y", vars), parse_rational("-(1-y)/x", vars)])
    w["restriction"] = str(r)
    ok_restrict = r == expected
    first = ChartField(chart, [r.coeffs[0], 0])
    d_first = divergence(first, chart)
    d_full = divergence(r, chart)
    w["div(first summand)"] = str(d_first)
    w["div(nu1)"] = str(d_full)
    ok_first = d_first == parse_rational("-1/(x*y)", vars)
    ok_full = d_full.is_zero()
    deg = params.get("max_degree", 3)
    nonzero = {}
    fams = s_family_instances(ring, deg)
    rnd = random.Random(params.get("seed", 0))
    for k, l in ((1, 0), (0, 1), (1, 1), (2, 1)):
        p = Polynomial.zero(("s",))
        for j in range(1, deg + 1):
            p = p + Polynomial.monomial((j,), ("s",), Fraction(rnd.randint(1, 9), rnd.randint(1, 4)))
        fams.append(s_type2(ring, k, l, p))
    for f in fams:
        dv = field_divergence(f, chart)
        if not dv.is_zero():
            nonzero[f.name or str(f)] = str(dv)
    w["family_instances"] = len(fams)
    w["nonzero_family_divergences"] = nonzero
    d_xnu = field_divergence(n1.scale("x"), chart)
    target = chart.to_chart(parse_polynomial("1+x*z", vars))
    w["div(x*nu1)"] = str(d_xnu)
    ok_xnu = d_xnu == target and not d_xnu.is_zero()
    w["domain"] = chart.domain_note
    return Outcome(_verdict(ok_restrict and ok_first and ok_full and not nonzero and ok_xnu), w)


def field_matrix_minors(fields) -> list[Polynomial]:
    rows = [f.coeffs for f in fields]
    out = []
    for r1, r2 in combinations(range(len(rows)), 2):
        for c1, c2 in combinations(range(len(rows[0])), 2):
            m = rows[r1][c1] * rows[r2][c2] - rows[r1][c2] * rows[r2][c1]
            if not m.is_zero():
                out.append(m)
    return out


@check("s-tangency-span")
def check_s_tangency_span(params) -> Outcome:
    ring = surface_s()
    w = {}
    fields = s_spanning_fields(ring)
    tang = [tangency_check(f) for f in fields]
    w["corrected_residuals"] = [[str(r) for r in t.residuals] for t in tang]
    ok_tang = all(t.ok for t in tang)
    printed = tangency_check(s_printed_third_field(ring))
    ambient = parse_polynomial("x*y*z*(y-x)", ring.vars)
    w["printed_third_value"] = [str(v) for v in printed.values]
    w["printed_third_residual"] = [str(r) for r in printed.residuals]
    ok_printed = (not printed.ok and printed.values == [ambient]
                  and printed.residuals == [ring.nf(ambient)])
    npts = params.get("points", 25)
    deficient = []
    for p in random_s_points(npts, params.get("seed", 0)):
        rep = span_at_point(fields, p, ring)
        if not rep.spans:
            deficient.append([num(c) for c in p])
    w["span_points"] = npts
    w["deficient_points"] = deficient
    gens = field_matrix_minors(fields) + list(ring.relations)
    bound = params.get("unit_cert_max_degree", 8)
    found = None
    for dd in range(bound + 1):
        cert = unit_ideal_certificate(gens, dd)
        if cert is not None:
            found = (dd, cert)
            break
    ok_cert = found is not None and found[1].verify()
    if found:
        w["unit_certificate_degree"] = found[0]
        w["unit_certificate_cofactors"] = [str(c) for c in found[1].cofactors]
        golden = params.get("expected_unit_certificate_degree")
        if golden is not None and golden != found[0]:
            ok_cert = False
            w["golden_mismatch"] = f"expected degree {golden}, found {found[0]}"
    else:
        w["unit_certificate_degree"] = f"none up to {bound}"
    w["generators"] = [str(g) for g in gens]
    if found is None and ok_tang and ok_printed and not deficient:
        return Outcome("inconclusive", w)
    return Outcome(_verdict(ok_tang and ok_printed and not deficient and ok_cert), w)


@check("line")
def check_line(params) -> Outcome:
    from .corpus import verify_line

    ring = _ring(params)
    rep = verify_line(params["param"], ring, params["defining"])
    return Outcome(_verdict(rep.ok), {"relation_residual": rep.relation_residual,
                                      "defining_residual": rep.defining_residual})


def c3_shears(ring: CoordinateRing) -> list[VectorField]:
    return [
        VectorField(ring, {"x1": "x2"}),
        VectorField(ring, {"x1": "x2^2*x3 - 3*x3 + 1/2"}),
        VectorField(ring, {"x2": "x1*x3^3"}),
        VectorField(ring, {"x3": "(x1 - 2*x2)^2"}),
        VectorField(ring, {"x1": "x2", "x2": "x3"}),
    ]


def sl2_chart(ring: CoordinateRing) -> VolumeChart:
    return VolumeChart(ring, ("a1", "a2", "b1"), {"b2": "(1+a2*b1)/a1"}, "1/a1",
                       "chart a1 != 0 of SL2; b2 = (1 + a2*b1)/a1", name="SL2-a1")


@check("flow-laws")
def check_flow_laws(params) -> Outcome:
    w = {}
    tol = params.get("tol", 1e-9)
    prec = params.get("precision", DEFAULT_PRECISION)
    # polynomial flows: exact laws and exact volume
    c3 = affine_space(3)
    std = VolumeChart.standard(c3)
    lnd_fail = []
    vol_fail = []
    for v in c3_shears(c3):
        F = certify_flow(v)
        if F is None or not F.is_polynomial or not (lnd_inverse_law(F) and lnd_group_law(F)):
            lnd_fail.append(str(v))
            continue
        rep = verify_automorphism(F.at_time(Fraction(7, 3)), std)
        if not rep.ok:
            vol_fail.append({str(v): rep.failures})
    s2 = sl2()
    ch2 = sl2_chart(s2)
    for v in sl2_pair(s2):
        F = certify_flow(v)
        if not (lnd_inverse_law(F) and lnd_group_law(F)):
            lnd_fail.append(str(v))
        for t in (Fraction(1), Fraction(-5, 2)):
            rep = verify_automorphism(F.at_time(t), ch2)
            if not rep.ok:
                vol_fail.append({str(v): rep.failures})
    w["polynomial_law_failures"] = lnd_fail
    # exp-unit flows on S: group law
    ring = surface_s()
    chart = torus_chart(ring)
    s_poly = Polynomial.var("s", ("s",))
    group_fields = s_spanning_fields(ring) + [s_type2(ring, 1, 1, s_poly), s_type2(ring, 2, 1, s_poly)]
    flows = [certify_flow(f) for f in group_fields]
    rnd = random.Random(params.get("seed", 0))
    worst = mpmath.mpf(0)
    triples = params.get("triples", 20)
    pts = random_s_points(triples, params.get("seed", 0) + 1)
    with mpmath.workprec(prec):
        for k in range(triples):
            F = flows[k % len(flows)]
            s = Fraction(rnd.randint(-8, 8), rnd.randint(1, 8))
            t = Fraction(rnd.randint(-8, 8), rnd.randint(1, 8))
            p = pts[k]
            a = flow_evaluate(F, s, flow_evaluate(F, t, p, prec).coords, prec).coords
            b = flow_evaluate(F, s + t, p, prec).coords
            for x, y in zip(a, b):
                x, y = to_mpf(x), to_mpf(y)
                err = abs(x - y) / max(mpmath.mpf(1), abs(y))
                worst = max(worst, err)
    w["group_law_max_relative_error"] = num(worst)
    ok_group = worst <= tol
    # volume check for every divergence-free S field in the corpus families
    vol_worst = mpmath.mpf(0)
    for f in s_spanning_fields(ring) + s_family_instances(ring, params.get("max_degree", 3)):
        F = certify_flow(f)
        if F is None:
            vol_fail.append({str(f): "no flow certificate"})
            continue
        rep = verify_flow_volume(F, chart, Fraction(1, 3), samples=params.get("samples", 10),
                                 tol=tol, precision=prec)
        vol_worst = max(vol_worst, to_mpf(rep.max_error))
        if not rep.ok:
            vol_fail.append({str(f): num(rep.max_error)})
    w["volume_max_error"] = num(vol_worst)
    w["volume_failures"] = vol_fail
    return Outcome(_verdict(not lnd_fail and ok_group and not vol_fail), w, tolerance=f"{tol:g} relative")


@check("closure-c2")
def check_closure_c2(params) -> Outcome:
    ring = affine_space(2)
    d = params.get("max_degree", 3)
    est = LieClosure(max_degree=d, depth=params.get("depth", 2)).fit(c2_closure_generators(ring, d))
    missing = []
    coords = {}
    for h in monomials_in(ring.vars, ring.vars, d):
        target = partial(ring, "x2", h)
        v = est.membership(target)
        if v.verdict == "member":
            coords[str(h)] = {str(k): num(c) for k, c in v.coordinates.items()}
        else:
            missing.append((str(h), v.verdict))
    return Outcome(_verdict(not missing), {"basis_size": len(est.basis_), "missing": missing,
                                           "coordinates": coords})


@check("closure-s")
def check_closure_s(params) -> Outcome:
    ring = surface_s()
    chart = torus_chart(ring)
    d, b = params.get("max_degree", 3), params.get("depth", 3)
    est = LieClosure(max_degree=d, depth=b).fit(s_closure_generators(ring, d))
    divs = est.divergences(chart)
    nonzero = [str(v) for v, dv in zip(est.basis_.spanned, divs) if not dv.is_zero()]
    target = nu1(ring).scale("x")
    verdict = est.membership(target, chart)
    w = {"basis_size": len(est.basis_), "depths": est.basis_.depths, "nonzero_divergence": nonzero,
         "target": str(target), "membership": verdict.verdict, "obstruction": verdict.obstruction,
         "note": "bounded search; the divergence obstruction is a genuine exclusion"}
    ok = not nonzero and verdict.verdict == "not-in-span" and verdict.obstruction is not None
    return Outcome(_verdict(ok), w)


def _points(params, key="points"):
    return [tuple(Fraction(c) for c in p) for p in params[key]]


@check("transitivity-s")
def check_transitivity(params) -> Outcome:
    ring = surface_s()
    tol = params.get("tol", 1e-9)
    surf_tol = params.get("surface_tol", 1e-12)
    stages = list(zip(s_spanning_fields(ring), S_INTEGRALS))
    pts = _points(params)
    tgt = tuple(Fraction(c) for c in params["target"])
    w = {"separation_violation": separation_violation([(s, ring.normal_form(f)) for s, f in stages], pts)}
    dist = max(abs(a - b) for a, b in zip(tgt, pts[0]))
    w["target_distance"] = num(dist)
    plan = build_transitivity_plan(stages, pts, tgt, tol=tol, precision=params.get("precision", DEFAULT_PRECISION))
    w["times"] = [num(t) for t in plan.times]
    w["residual"] = num(plan.residual)
    w["iterations"] = plan.iterations
    fixed_exact = all(tuple(img) == p for img, p in zip(plan.images[1:], pts[1:]))
    w["fixed_points_exact"] = fixed_exact
    w["stage_fields_vanish"] = plan.fixed_point_property()
    # surface residual at every intermediate image
    worst = mpmath.mpf(0)
    for p in pts:
        cur = p
        for st in plan.stages:
            img = flow_evaluate(st.flow, st.time, cur, params.get("precision", DEFAULT_PRECISION))
            cur = img.coords
            worst = max(worst, to_mpf(img.residual))
    w["max_surface_residual"] = num(worst)
    ok = (w["separation_violation"] is None and dist >= Fraction(1, 100) and plan.converged
          and fixed_exact and w["stage_fields_vanish"] and worst <= surf_tol)
    return Outcome(_verdict(ok), w, tolerance=f"target {tol:g}, surface {surf_tol:g}")


@check("separation-s")
def check_separation(params) -> Outcome:
    ring = surface_s()
    stages = list(zip(s_spanning_fields(ring), S_INTEGRALS))
    pts = _points(params)
    prepared = [(s, ring.normal_form(f)) for s, f in stages]
    before = separation_violation(prepared, pts)
    res = perturb_to_separated(stages, pts)
    after = separation_violation(prepared, res.points)
    w = {"collision_before": before, "collision_after": after,
         "moves": [{"point": i, "stage": k, "time": num(t)} for i, k, t in res.moves],
         "points": [[num(c) for c in p] for p in res.points],
         "surface_residuals": [num(r) for r in res.residuals]}
    ok = before is not None and after is None and all(to_mpf(r) <= 1e-12 for r in res.residuals)
    return Outcome(_verdict(ok), w, tolerance="surface 1e-12")


def run_check(name: str, params: dict) -> Outcome:
    if name not in CHECKS:
        raise InputError(f"unknown check {name!r}; known: {', '.join(sorted(CHECKS))}")
    return CHECKS[name](params)
