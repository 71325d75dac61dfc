"""Command-line interface: ``avf <subcommand> ...``.

Exit codes: 0 verified, 1 check failed, 2 inconclusive (bounds reached),
3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

from . import io
from .algebra import Polynomial, RationalFunction
from .corpus import dump_reports, format_report_text, run_corpus, shipped_corpus_dir
from .density import (
    LieClosure,
    compatibility_check,
    semi_compatibility_evidence,
    TransitivityPlanner,
)
from .derivations import bracket, span_at_point, tangency_check
from .errors import BudgetExceeded, InputError
from .families import S_INTEGRALS, c2_closure_generators, s_closure_generators, s_spanning_fields
from .integrability import (
    certify_flow,
    flow_evaluate,
    kernel_linear_certify,
    lnd_certify,
    lnd_degree,
    verify_automorphism,
    verify_flow_volume,
)
from .checks import num
from .parsing import parse_expression, parse_polynomial
from .varieties import Point, unit_ideal_certificate
from .volume import field_divergence, restrict_to_chart

OK, FAILED, INCONCLUSIVE, BAD_INPUT = 0, 1, 2, 3

GLOBAL_DEFAULTS = {"jobs": 1, "precision": 256, "max_degree": None, "depth": 3, "tol": 1e-9, "format": "text"}


def _global_options(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda k: argparse.SUPPRESS) if suppress else (lambda k: GLOBAL_DEFAULTS[k])
    g = parser.add_argument_group("global options")
    g.add_argument("--jobs", type=int, default=d("jobs"), help="worker processes for corpus runs")
    g.add_argument("--precision", type=int, default=d("precision"), help="binary precision of exp-units")
    g.add_argument("--max-degree", type=int, default=d("max_degree"), help="degree bound for bounded searches")
    g.add_argument("--depth", type=int, default=d("depth"), help="bracket depth for closures")
    g.add_argument("--tol", type=float, default=d("tol"), help="numeric tolerance")
    g.add_argument("--format", choices=("text", "json"), default=d("format"))


class Out:
    def __init__(self, args):
        self.json = args.format == "json"
        self.data: dict = {}
        self.lines: list[str] = []

    def add(self, key: str, value, text: str | None = None):
        self.data[key] = value
        if text is not None:
            self.lines.append(text)
        elif not isinstance(value, (dict, list)):
            self.lines.append(f"{key}: {value}")

    def text(self, line: str):
        self.lines.append(line)

    def emit(self, code: int) -> int:
        if self.json:
            self.data["exit_code"] = code
            print(json.dumps(self.data, indent=2, sort_keys=True, default=str))
        else:
            print("\n".join(self.lines))
        return code


def _variety(ref):
    return io.resolve_variety(ref, Path.cwd())


def _field(path):
    return io.load(path, "field")


def _point(path, ring=None) -> list[Point]:
    obj = io.load(path, "point-set", ring)
    return obj if isinstance(obj, list) else [obj]


# -- subcommands ---------------------------------------------------------------


def cmd_parse(args, out: Out) -> int:
    vars = args.vars.split(",") if args.vars else None
    e = parse_expression(args.expr, vars)
    kind = "polynomial" if isinstance(e, Polynomial) else "rational function"
    out.add("canonical", str(e), str(e))
    out.add("kind", kind)
    out.data["vars"] = list(e.vars)
    return OK


def cmd_nf(args, out: Out) -> int:
    ring = _variety(args.variety)
    r = ring.normal_form(args.poly)
    out.add("normal_form", str(r), str(r))
    out.data["ideal_member"] = r.is_zero()
    return OK


def _tangent_line(out: Out, key: str, v) -> bool:
    res = tangency_check(v)
    if res.ok:
        out.add(key, {"tangent": True}, f"{key}: tangent")
    else:
        out.add(key, {"tangent": False, "residuals": [str(r) for r in res.residuals]},
                f"{key}: NOT tangent, residuals " + ", ".join(str(r) for r in res.residuals))
    return res.ok


def cmd_bracket(args, out: Out) -> int:
    v, w = _field(args.field1).certified(), _field(args.field2).certified()
    b = bracket(v, w)
    out.add("bracket", b.coeff_dict(), f"[v, w] = {b}")
    ok = _tangent_line(out, "tangency", b)
    return OK if ok else FAILED


def cmd_apply(args, out: Out) -> int:
    v = _field(args.field)
    r = v.apply(args.function)
    out.add("value", str(r), str(r))
    return OK


def cmd_div(args, out: Out) -> int:
    v = _field(args.field)
    chart = io.load(args.form, "form")
    cf = restrict_to_chart(v, chart)
    d = field_divergence(v, chart)
    out.add("restriction", str(cf), f"restriction: {cf}")
    out.add("divergence", str(d), f"divergence: {d}")
    out.add("domain", chart.domain_note, f"domain: {chart.domain_note}")
    return OK


def cmd_lnd_degree(args, out: Out) -> int:
    v = _field(args.field).certified()
    d = lnd_degree(v, args.a, args.bound)
    if d is None:
        out.add("degree", None, f"exceeded bound {args.bound} (inconclusive)")
        return INCONCLUSIVE
    out.add("degree", d, f"deg = {d}")
    return OK


def cmd_lnd_certify(args, out: Out) -> int:
    v = _field(args.field).certified()
    cert = lnd_certify(v, args.bound)
    if cert is None:
        out.add("certificate", None, f"not locally nilpotent within bound {args.bound} (inconclusive)")
        return INCONCLUSIVE
    out.add("degrees", cert.degrees, "degrees: " + ", ".join(f"{k}:{d}" for k, d in cert.degrees.items()))
    return OK


def cmd_flow(args, out: Out) -> int:
    v = _field(args.field).certified()
    F = certify_flow(v)
    if F is None:
        kc = kernel_linear_certify(v)
        out.add("flow", None, "no flow certificate (not LND within bound, not kernel- or triangular-linear)")
        out.data["unsatisfied"] = list(getattr(kc, "unsatisfied", ()))
        return INCONCLUSIVE
    out.add("flow", str(F), str(F))
    if args.at is not None:
        t = Fraction(args.t) if args.t is not None else Fraction(1)
        for p in _point(args.at, v.ring):
            img = flow_evaluate(F, t, p, args.precision)
            with mpmath.workprec(args.precision):
                coords = [num(c) for c in img.coords]
                res = num(img.residual)
            out.add("image", coords, f"image at t={t}: ({', '.join(coords)}), residual {res}")
            out.data["residual"] = res
            out.data["exact"] = img.exact
    return OK


def cmd_verify_aut(args, out: Out) -> int:
    obj = io.load_json(args.file)
    chart = io.load(args.form, "form") if args.form else None
    if obj.get("type") == "automorphism":
        phi = io.load(args.file, "automorphism")
        rep = verify_automorphism(phi, chart)
    else:
        v = _field(args.file).certified()
        F = certify_flow(v)
        if F is None:
            out.add("error", "no flow certificate", "no flow certificate for this field")
            return INCONCLUSIVE
        t = Fraction(args.t or "1")
        if not F.is_polynomial:
            if chart is None:
                raise InputError("numeric volume check of an exp-unit flow needs --form")
            vr = verify_flow_volume(F, chart, t, samples=10, tol=args.tol, precision=args.precision)
            out.add("volume_ok", vr.ok, f"volume: {'ok' if vr.ok else 'FAILED'} (max error {num(vr.max_error)}, tol {vr.tol:g})")
            return OK if vr.ok else FAILED
        rep = verify_automorphism(F.at_time(t), chart)
    out.add("relations_ok", rep.relations_ok, f"relations preserved: {rep.relations_ok}")
    out.add("inverse_ok", rep.inverse_ok, f"inverse: {rep.inverse_ok}")
    if rep.volume_ok is not None:
        out.add("volume_ok", rep.volume_ok, f"volume: {rep.volume_ok} (factor {rep.jacobian_factor})")
    if rep.failures:
        out.add("failures", rep.failures, "failures: " + json.dumps(rep.failures))
    return OK if rep.ok else FAILED


def cmd_span(args, out: Out) -> int:
    fields = [_field(f) for f in args.fields]
    ring = fields[0].ring if fields else _variety(args.variety or "S")
    worst = OK
    for p in _point(args.at, ring):
        rep = span_at_point(fields, p, ring)
        out.add(f"point {p}", {"rank": rep.tangent_rank, "dimension": rep.dimension, "verdict": rep.verdict},
                f"{p}: rank {rep.tangent_rank} of {rep.dimension}, {rep.verdict}")
        if not rep.spans:
            worst = FAILED
    return worst


def cmd_unit_cert(args, out: Out) -> int:
    ring = _variety(args.variety)
    gens = [parse_polynomial(g, ring.vars) for g in args.gens]
    bound = args.max_degree if args.max_degree is not None else 4
    for d in range(bound + 1):
        cert = unit_ideal_certificate(gens, d)
        if cert is not None:
            out.add("degree", d, f"certificate at degree {d}, verified: {cert.verify()}")
            out.add("cofactors", [str(c) for c in cert.cofactors],
                    "\n".join(f"  ({c}) * ({g})" for c, g in zip(cert.cofactors, gens)))
            return OK if cert.verify() else FAILED
    out.add("degree", None, f"none up to degree {bound} (inconclusive, not a refutation)")
    return INCONCLUSIVE


def _exprs(items):
    return [x for s in items or [] for x in s.split(",") if x.strip()]


def cmd_compat(args, out: Out) -> int:
    sigma = _field(args.sigma).certified()
    delta = _field(args.delta).certified()
    cc = compatibility_check(sigma, delta, args.witness)
    out.add("mode", cc.mode, f"mode: {cc.mode}")
    out.add("degrees", [str(d) for d in cc.degrees], f"degrees: {cc.degrees}")
    out.add("condition1", cc.condition1, f"condition (1) a in Ker delta, sigma(a) in Ker sigma \\ 0: {cc.condition1}")
    out.add("condition2", cc.condition2, f"condition (2) deg_sigma(a) = 1 = deg_delta(a): {cc.condition2}")
    code = OK if cc.ok else FAILED
    if args.ker_sigma or args.ker_delta:
        d = args.max_degree if args.max_degree is not None else 3
        ev = semi_compatibility_evidence(sigma, delta, _exprs(args.ker_sigma), _exprs(args.ker_delta),
                                         args.ideal_witness, d)
        out.add("semi_compatibility", {"ok": ev.ok, "monomials_verified": ev.monomials_verified,
                                       "failures": ev.failures, "note": ev.note},
                f"semi-compatibility up to degree {d}: {'ok' if ev.ok else 'FAILED'} "
                f"({ev.monomials_verified} monomials; failures: {', '.join(ev.failures) or 'none'}); {ev.note}")
        if not ev.ok:
            code = FAILED
    out.text("homogeneity of the variety is an external assumption, not checked")
    return code


def _default_generators(ring, d):
    if ring.name == "S":
        return s_closure_generators(ring, d)
    if ring.name == "C2":
        return c2_closure_generators(ring, d)
    raise InputError(f"no built-in generator family for variety {ring.name!r}; pass --generators")


def cmd_closure(args, out: Out) -> int:
    d = args.max_degree if args.max_degree is not None else 3
    gens = [_field(f) for f in args.generators or []]
    targets = [_field(f) for f in args.targets or []]
    if gens:
        ring = gens[0].ring
    elif targets:
        ring = targets[0].ring
    else:
        ring = _variety(args.variety or "S")
    if not gens:
        gens = _default_generators(ring, d)
    est = LieClosure(max_degree=d, depth=args.depth).fit(gens)
    chart = io.load(args.form, "form") if args.form else None
    if chart is None and ring.name == "S":
        from .families import torus_chart

        chart = torus_chart(ring)
    out.add("basis_size", len(est.basis_), f"closure basis: {len(est.basis_)} fields (d = {d}, b = {args.depth})")
    if chart is not None:
        nz = sum(not dv.is_zero() for dv in est.divergences(chart))
        out.add("nonzero_divergence_count", nz, f"basis fields with nonzero divergence: {nz}")
    failed = inconclusive = False
    for path, t in zip(args.targets or [], targets):
        v = est.membership(t, chart)
        info = {"verdict": v.verdict, "coordinates": {str(k): str(c) for k, c in v.coordinates.items()},
                "obstruction": v.obstruction}
        line = f"{path}: {v.verdict}"
        if v.obstruction:
            line += f" ({v.obstruction})"
        out.add(str(path), info, line)
        if v.verdict == "not-in-span" and v.obstruction:
            failed = True
        elif not v.member:
            inconclusive = True
    return FAILED if failed else INCONCLUSIVE if inconclusive else OK


def cmd_transit(args, out: Out) -> int:
    if args.stages:
        stages = io.load(args.stages, "stages")
        ring = stages[0][0].ring
    else:
        ring = io.builtin_variety("S")
        stages = list(zip(s_spanning_fields(ring), (ring.normal_form(f) for f in S_INTEGRALS)))
    pts = _point(args.points, ring)
    target = _point(args.target, ring)[0]
    planner = TransitivityPlanner(stages, tol=args.tol, precision=args.precision).fit(pts, target)
    plan = planner.plan_
    with mpmath.workprec(args.precision):
        out.add("times", [num(t) for t in plan.times], "times: " + ", ".join(num(t) for t in plan.times))
        out.add("residual", num(plan.residual), f"target residual: {num(plan.residual)} (tol {args.tol:g})")
        out.add("fixed_points_exact", all(tuple(i) == p.coords for i, p in zip(plan.images[1:], pts[1:])))
        out.add("surface_residuals", [num(r) for r in plan.surface_residuals],
                "surface residuals: " + ", ".join(num(r) for r in plan.surface_residuals))
    for k, st in enumerate(plan.stages):
        out.text(f"stage {k + 1}: integral {st.integral}, selector p(s) = {st.selector}")
    out.add("converged", plan.converged)
    return OK if plan.converged and out.data["fixed_points_exact"] else FAILED


def cmd_verify(args, out: Out) -> int:
    directory = args.corpus or shipped_corpus_dir()
    summary = run_corpus(directory, args.filter, args.jobs)
    if out.json:
        print(dump_reports(summary, timing=not args.no_timing))
    else:
        print(format_report_text(summary))
    return summary.exit_code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="avf", description="Exact computer algebra for polynomial vector fields on affine varieties.")
    _global_options(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        _global_options(sp, suppress=True)
        sp.set_defaults(func=fn)
        return sp

    sp = add("parse", cmd_parse, "parse and canonically print an expression")
    sp.add_argument("expr")
    sp.add_argument("--vars", help="comma-separated variable order (default: order of appearance)")
    sp = add("nf", cmd_nf, "normal form modulo a variety's ideal")
    sp.add_argument("poly")
    sp.add_argument("--variety", default="S", help="built-in name or variety file")
    sp = add("bracket", cmd_bracket, "Lie bracket of two field files")
    sp.add_argument("field1")
    sp.add_argument("field2")
    sp = add("apply", cmd_apply, "apply a field to a function")
    sp.add_argument("field")
    sp.add_argument("function")
    sp = add("div", cmd_div, "chart divergence of a field")
    sp.add_argument("field")
    sp.add_argument("--form", required=True)
    sp = add("lnd-degree", cmd_lnd_degree, "nilpotency degree deg_sigma(a)")
    sp.add_argument("field")
    sp.add_argument("--a", required=True)
    sp.add_argument("--bound", type=int, default=64)
    sp = add("lnd-certify", cmd_lnd_certify, "certify local nilpotency on the generators")
    sp.add_argument("field")
    sp.add_argument("--bound", type=int, default=64)
    sp = add("flow", cmd_flow, "closed-form flow, optionally evaluated at points")
    sp.add_argument("field")
    sp.add_argument("--t")
    sp.add_argument("--at", help="point or point-set file")
    sp = add("verify-aut", cmd_verify_aut, "verify an automorphism file, or the time-t flow of a field file")
    sp.add_argument("file")
    sp.add_argument("--t")
    sp.add_argument("--form")
    sp = add("span", cmd_span, "rank of field values at points")
    sp.add_argument("fields", nargs="*")
    sp.add_argument("--at", required=True)
    sp.add_argument("--variety")
    sp = add("unit-cert", cmd_unit_cert, "bounded Nullstellensatz certificate 1 = sum c_i g_i")
    sp.add_argument("gens", nargs="+")
    sp.add_argument("--variety", default="C3")
    sp = add("compat", cmd_compat, "compatible-pair conditions for two fields")
    sp.add_argument("--sigma", required=True)
    sp.add_argument("--delta", required=True)
    sp.add_argument("--witness", required=True)
    sp.add_argument("--ker-sigma", action="append", help="comma-separated kernel elements of sigma")
    sp.add_argument("--ker-delta", action="append", help="comma-separated kernel elements of delta")
    sp.add_argument("--ideal-witness", default="1")
    sp = add("closure", cmd_closure, "bounded Lie closure and membership")
    sp.add_argument("--generators", nargs="*")
    sp.add_argument("--targets", nargs="*")
    sp.add_argument("--variety")
    sp.add_argument("--form")
    sp = add("transit", cmd_transit, "move one point to a target while fixing the others")
    sp.add_argument("--points", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--stages", help="stages file (default: the spanning fields of S)")
    sp = add("verify", cmd_verify, "run a corpus directory (default: the shipped corpus)")
    sp.add_argument("corpus", nargs="?")
    sp.add_argument("--filter")
    sp.add_argument("--no-timing", action="store_true", help="omit timing fields from JSON reports")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Out(args)
    try:
        code = args.func(args, out)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT
    except BudgetExceeded as e:
        print(f"inconclusive: {e}", file=sys.stderr)
        return INCONCLUSIVE
    if args.command == "verify":
        return code
    return out.emit(code)


if __name__ == "__main__":
    sys.exit(main())
