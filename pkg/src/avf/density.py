"""Density-property toolkit.

Compatible pairs of derivations, bounded Lie closures of integrable fields
with exact membership, divergence screening, and the constructive
transitivity procedure that moves one point while freezing the others.

The two bounded searches are exposed as scikit-learn style estimators,
:class:`LieClosure` and :class:`TransitivityPlanner`; the function API
(``closure_span``, ``closure_member``, ``build_transitivity_plan``) wraps
them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .algebra import Polynomial
from .derivations import VectorField, bracket, kernel_member
from .errors import InputError, SeparationError
from .integrability import (
    DEFAULT_BOUND,
    DEFAULT_PRECISION,
    FlowExpression,
    KernelLinearCertificate,
    flow,
    flow_evaluate,
    kernel_linear_certify,
    lnd_certify,
    lnd_degree,
    relation_residual,
    semisimple_weights,
    to_mpf,
    triangular_certify,
)
from .linalg import IncrementalSpan
from .varieties import CoordinateRing, Point, RingElement
from .volume import VolumeChart, field_divergence


def _vec(p: Polynomial) -> dict:
    return p.term_dict()


def field_vector(v: VectorField) -> dict:
    """Coefficient vector indexed by ``(coordinate, exponents)``."""
    out = {}
    for i, c in enumerate(v.coeffs):
        for e, x in c.term_dict().items():
            out[(i, e)] = x
    return out


# -- compatible pairs ----------------------------------------------------------


@dataclass
class SemiCompatibilityEvidence:
    ok: bool
    ideal_witness: RingElement
    degree_bound: int
    monomials_verified: int
    failures: list = field(default_factory=list)
    coordinates: dict = field(default_factory=dict)
    note: str = "bounded evidence: success up to the degree bound is not a proof for all degrees"


def semi_compatibility_evidence(sigma: VectorField, delta: VectorField, ker_sigma: Sequence,
                                ker_delta: Sequence, ideal_witness, d: int) -> SemiCompatibilityEvidence:
    """Check that ``ideal_witness * m`` lies in Span(Ker sigma * Ker delta) for every
    standard monomial ``m`` of degree <= d, using the supplied kernel elements."""
    ring = sigma.ring
    ks = [ring.normal_form(k) for k in ker_sigma]
    kd = [ring.normal_form(k) for k in ker_delta]
    for k in ks:
        if not kernel_member(sigma, k):
            raise InputError(f"{k} is not in the kernel of sigma")
    for k in kd:
        if not kernel_member(delta, k):
            raise InputError(f"{k} is not in the kernel of delta")
    w = ring.normal_form(ideal_witness)
    if w.is_zero():
        raise InputError("ideal witness must be nonzero")
    span = IncrementalSpan()
    for i, a in enumerate(ks):
        for j, b in enumerate(kd):
            span.add(_vec((a * b).rep), (i, j))
    failures, coords = [], {}
    monos = ring.standard_monomials(d)
    for e in monos:
        target = ring.normal_form(Polynomial.monomial(e, ring.vars)) * w
        c = span.express(_vec(target.rep))
        m = str(Polynomial.monomial(e, ring.vars))
        if c is None:
            failures.append(m)
        else:
            coords[m] = {f"({ks[i]})*({kd[j]})": x for (i, j), x in c.items()}
    return SemiCompatibilityEvidence(not failures, w, d, len(monos) - len(failures), failures, coords)


@dataclass
class CompatibilityCheck:
    ok: bool
    mode: str  # "LND+LND" or "LND+semisimple"
    witness_a: RingElement
    condition1: bool  # a in Ker delta and sigma(a) in Ker sigma \ 0
    condition2: bool  # both LND and deg_sigma(a) = 1 = deg_delta(a)
    degrees: tuple  # (deg_sigma(a), deg_delta(a) or "a in Ker delta" flag)


def compatibility_check(sigma: VectorField, delta: VectorField, a, bound: int = DEFAULT_BOUND) -> CompatibilityCheck:
    ring = sigma.ring
    a = ring.normal_form(a)
    if lnd_certify(sigma, bound) is None:
        raise InputError("sigma is not certified locally nilpotent")
    if lnd_certify(delta, bound) is not None:
        mode = "LND+LND"
    elif semisimple_weights(delta) is not None:
        mode = "LND+semisimple"
    else:
        raise InputError("delta is neither certified locally nilpotent nor diagonal semisimple")
    ds = lnd_degree(sigma, a, bound)
    in_ker_delta = kernel_member(delta, a)
    cond1 = in_ker_delta and ds == 1
    if mode == "LND+LND":
        dd = lnd_degree(delta, a, bound)
        cond2 = ds == 1 and dd == 1
        degrees = (ds, dd)
    else:
        cond2 = False
        degrees = (ds, in_ker_delta)
    return CompatibilityCheck(cond1 or cond2, mode, a, cond1, cond2, degrees)


@dataclass
class CompatibilityReport:
    semi: SemiCompatibilityEvidence
    check: CompatibilityCheck

    @property
    def ok(self) -> bool:
        return self.semi.ok and self.check.ok


def compatibility_report(sigma, delta, a, ker_sigma, ker_delta, ideal_witness=1, d=3) -> CompatibilityReport:
    return CompatibilityReport(
        semi_compatibility_evidence(sigma, delta, ker_sigma, ker_delta, ideal_witness, d),
        compatibility_check(sigma, delta, a),
    )


# -- Lie closure ---------------------------------------------------------------


@dataclass
class ClosureBasis:
    generators: list
    spanned: list  # VectorField, in insertion order
    depths: list  # bracket depth of each spanned field
    origins: list  # None for generators, (i, j) for [spanned[i], spanned[j]]
    degree_bound: int
    depth_bound: int
    span: IncrementalSpan = field(repr=False, default_factory=IncrementalSpan)

    @property
    def coefficient_index(self) -> list:
        keys = set()
        for v in self.spanned:
            keys.update(field_vector(v))
        return sorted(keys, key=lambda k: (k[0], -sum(k[1]), tuple(-x for x in k[1])))

    def __len__(self):
        return len(self.spanned)


@dataclass
class MembershipVerdict:
    verdict: str  # "member", "not-in-span", "inconclusive"
    coordinates: dict = field(default_factory=dict)  # spanned index -> coefficient
    obstruction: str | None = None

    @property
    def member(self) -> bool:
        return self.verdict == "member"


class LieClosure(BaseEstimator):
    """Bounded Lie closure of a list of tangent fields.

    Parameters
    ----------
    max_degree : int
        Coefficient degree bound ``d``; brackets above it are discarded.
    depth : int
        Number of bracketing rounds ``b``.

    Attributes
    ----------
    basis_ : ClosureBasis
    """

    def __init__(self, max_degree: int = 3, depth: int = 3):
        self.max_degree = max_degree
        self.depth = depth

    def fit(self, generators, y=None):
        generators = list(generators)
        if not generators:
            raise InputError("closure needs at least one generator")
        ring = generators[0].ring
        gens = []
        for g in generators:
            if g.ring != ring:
                raise InputError("generators live on different rings")
            gens.append(g if g.is_certified else g.certified())
        basis = ClosureBasis(gens, [], [], [], self.max_degree, self.depth)
        for g in gens:
            if g.degree() <= self.max_degree and basis.span.add(field_vector(g), len(basis.spanned)):
                basis.spanned.append(g)
                basis.depths.append(0)
                basis.origins.append(None)
        frontier = list(range(len(basis.spanned)))
        for level in range(1, self.depth + 1):
            current = len(basis.spanned)
            fset = set(frontier)
            new = []
            for i in frontier:
                for j in range(current):
                    if j in fset and j <= i:
                        continue
                    br = bracket(basis.spanned[i], basis.spanned[j])
                    if br.is_zero() or br.degree() > self.max_degree:
                        continue
                    if basis.span.add(field_vector(br), len(basis.spanned)):
                        basis.spanned.append(br.certified())
                        basis.depths.append(level)
                        basis.origins.append((i, j))
                        new.append(len(basis.spanned) - 1)
            if not new:
                break
            frontier = new
        self.basis_ = basis
        self.ring_ = ring
        return self

    def membership(self, target: VectorField, chart: VolumeChart | None = None) -> MembershipVerdict:
        check_is_fitted(self, "basis_")
        return closure_member(self.basis_, target, chart)

    def predict(self, targets) -> np.ndarray:
        """Boolean membership for each target field."""
        return np.array([self.membership(t).member for t in targets], dtype=bool)

    def divergences(self, chart: VolumeChart) -> list:
        check_is_fitted(self, "basis_")
        return [field_divergence(v, chart) for v in self.basis_.spanned]


def closure_span(generators, d: int, b: int) -> ClosureBasis:
    return LieClosure(max_degree=d, depth=b).fit(generators).basis_


def closure_member(basis: ClosureBasis, target: VectorField, chart: VolumeChart | None = None) -> MembershipVerdict:
    """Exact membership of ``target`` in the span of the closure basis.

    With a chart, a negative answer is upgraded to a genuine exclusion when
    every basis field is divergence free and the target is not.
    """
    if target.degree() > basis.degree_bound:
        return MembershipVerdict("inconclusive", obstruction="target degree exceeds the closure bound")
    coords = basis.span.express(field_vector(target))
    if coords is not None:
        total = VectorField(target.ring, [0] * len(target.ring.vars))
        for k, c in coords.items():
            total = total + basis.spanned[k].scale(c)
        if total != target:
            raise AssertionError("membership coordinates failed to re-verify")
        return MembershipVerdict("member", dict(sorted(coords.items())))
    obstruction = None
    if chart is not None:
        tdiv = field_divergence(target, chart)
        if not tdiv.is_zero() and all(field_divergence(v, chart).is_zero() for v in basis.spanned):
            obstruction = f"nonzero divergence {tdiv} while every basis field is divergence free"
    return MembershipVerdict("not-in-span", obstruction=obstruction)


# -- transitivity --------------------------------------------------------------


def lagrange_selector(values_fixed: Sequence[Fraction], value_moving: Fraction, var: str = "s") -> Polynomial:
    """``prod (s - c) / (value_moving - c)`` over the fixed values ``c``."""
    vars = (var,)
    s = Polynomial.var(var, vars)
    p = Polynomial.constant(1, vars)
    for c in values_fixed:
        p = p * (s - c) * Fraction(1, 1) / (value_moving - c)
    return p


def _exact(x):
    return isinstance(x, (int, Fraction))


def _to_fraction(x) -> Fraction:
    if _exact(x):
        return Fraction(x)
    m, e = mpmath.mpf(x).man_exp
    return Fraction(int(m)) * (Fraction(2) ** int(e))


def _evaluate(f: RingElement, coords):
    if all(_exact(c) for c in coords):
        return f.evaluate(coords)
    return f.evaluate([to_mpf(c) for c in coords], to_mpf)


def _stage_flow(sigma: VectorField, h: RingElement) -> tuple[VectorField, FlowExpression]:
    """Field ``h * sigma`` (``h`` a first integral of ``sigma``) and its flow."""
    tau = sigma.scale(h).certified()
    cert = lnd_certify(tau)
    if cert is None:
        base = kernel_linear_certify(sigma)
        cert = base.scaled(h) if base else triangular_certify(tau)
        if not cert:
            raise InputError(f"no flow certificate for {sigma}")
    return tau, flow(tau, cert)


def separation_violation(stages, coords_list) -> tuple | None:
    """First ``(stage, i, l)`` with ``f_stage(x_i) == f_stage(x_l)``, or None."""
    for j, (_, f) in enumerate(stages):
        vals = [_evaluate(f, c) for c in coords_list]
        for i in range(len(vals)):
            for l in range(i + 1, len(vals)):
                if vals[i] == vals[l]:
                    return (j, i, l)
    return None


@dataclass
class Stage:
    field: VectorField
    integral: RingElement
    selector: Polynomial  # univariate polynomial p_j
    stage_field: VectorField
    flow: FlowExpression
    time: object = 0


@dataclass
class TransitivityPlan:
    stages: list
    moving_point: tuple
    fixed_points: list
    target: tuple
    converged: bool = False
    residual: object = None  # max-norm distance of the moved point to the target
    images: list = field(default_factory=list)
    surface_residuals: list = field(default_factory=list)
    iterations: int = 0

    @property
    def times(self) -> list:
        return [s.time for s in self.stages]

    def fixed_point_property(self) -> bool:
        """Every stage field vanishes exactly at every fixed point."""
        return all(
            all(x == 0 for x in st.stage_field.evaluate(p))
            for st in self.stages for p in self.fixed_points
        )


def _coords(p):
    return tuple(p.coords) if isinstance(p, Point) else tuple(p)


def apply_stages(stages: Sequence[Stage], times, point, precision=DEFAULT_PRECISION):
    """Composite image: stage 1 first."""
    cur = _coords(point)
    for st, t in zip(stages, times):
        cur = flow_evaluate(st.flow, t, cur, precision).coords
    return cur


class TransitivityPlanner(BaseEstimator):
    """Move the first point to a target while freezing the others.

    Parameters
    ----------
    stages : list of (VectorField, first integral) pairs
    tol : float
        Target accuracy in the max norm.
    max_iter : int
        Newton iteration cap.
    precision : int
        Binary precision of exp-unit evaluation.
    fd_step : float
        Central-difference step on the flow times.
    max_step : float
        Cap on the largest time update per iteration.
    """

    def __init__(self, stages=(), tol: float = 1e-9, max_iter: int = 100,
                 precision: int = DEFAULT_PRECISION, fd_step: float = 2.0 ** -20, max_step: float = 1.0):
        self.stages = stages
        self.tol = tol
        self.max_iter = max_iter
        self.precision = precision
        self.fd_step = fd_step
        self.max_step = max_step

    def _prepare(self, points):
        if not self.stages:
            raise InputError("transitivity needs at least one (field, integral) stage")
        ring = self.stages[0][0].ring
        coords = []
        for p in points:
            c = _coords(p)
            if all(_exact(x) for x in c):
                Point.on(ring, c)
            elif relation_residual(ring, c) > 1e-12:
                raise InputError(f"point {c} is not on the variety")
            coords.append(c)
        prepared = []
        for sigma, f in self.stages:
            f = ring.normal_form(f)
            if not sigma.is_certified:
                sigma = sigma.certified()
            if not kernel_member(sigma, f):
                raise InputError(f"{f} is not a first integral of {sigma}")
            prepared.append((sigma, f))
        clash = separation_violation(prepared, coords)
        if clash is not None:
            j, i, l = clash
            raise SeparationError(
                f"separation condition violated: integral {prepared[j][1]} takes equal values "
                f"at points {i + 1} and {l + 1}", stage=j, pair=(i, l))
        return ring, prepared, coords

    def fit(self, points, target):
        ring, prepared, coords = self._prepare(points)
        x1, others = coords[0], coords[1:]
        stages = []
        for sigma, f in prepared:
            fixed_vals = [_to_fraction(_evaluate(f, c)) for c in others]
            sel = lagrange_selector(fixed_vals, _to_fraction(_evaluate(f, x1)))
            h = ring.normal_form(sel.compose({"s": f.rep}, ring.vars))
            tau, F = _stage_flow(sigma, h)
            if not kernel_member(tau, f):
                raise AssertionError("integral is not preserved by the stage field")
            stages.append(Stage(sigma, f, sel, tau, F))
        tgt = _coords(target)
        plan = TransitivityPlan(stages, x1, list(others), tgt)
        if not plan.fixed_point_property():
            raise AssertionError("stage field does not vanish at a fixed point")
        self._newton(plan)
        for p in coords:
            img = apply_stages(stages, plan.times, p, self.precision)
            plan.images.append(img)
            with mpmath.workprec(self.precision):
                plan.surface_residuals.append(relation_residual(ring, img))
        self.plan_ = plan
        return self

    def _newton(self, plan: TransitivityPlan):
        k = len(plan.stages)
        tgt = plan.target
        prec = self.precision
        with mpmath.workprec(prec):
            tgt_mp = [to_mpf(c) for c in tgt]

            def resid(ts):
                img = apply_stages(plan.stages, ts, plan.moving_point, prec)
                return [to_mpf(a) - b for a, b in zip(img, tgt_mp)]

            def norm(r):
                return max(abs(x) for x in r)

            ts = [mpmath.mpf(0)] * k
            r = resid(ts)
            best = norm(r)
            it = 0
            h = mpmath.mpf(self.fd_step)
            while best > self.tol * 1e-3 and it < self.max_iter:
                it += 1
                cols = []
                for j in range(k):
                    up = list(ts)
                    dn = list(ts)
                    up[j] += h
                    dn[j] -= h
                    ru, rd = resid(up), resid(dn)
                    cols.append([float((a - b) / (2 * h)) for a, b in zip(ru, rd)])
                J = np.array(cols).T
                # the time Jacobian has rank <= dim X < k in general; drop noise singular values
                step = np.linalg.lstsq(J, -np.array([float(x) for x in r]), rcond=1e-8)[0]
                big = float(np.max(np.abs(step))) if step.size else 0.0
                if big > self.max_step:
                    step = step * (self.max_step / big)
                lam = mpmath.mpf(1)
                improved = False
                for _ in range(40):
                    trial = [t + lam * mpmath.mpf(float(s)) for t, s in zip(ts, step)]
                    rt = resid(trial)
                    if norm(rt) < best:
                        ts, r, best = trial, rt, norm(rt)
                        improved = True
                        break
                    lam /= 2
                if not improved:
                    break
            for st, t in zip(plan.stages, ts):
                st.time = t
            plan.residual = best
            plan.iterations = it
            plan.converged = bool(best <= self.tol)

    def transform(self, points):
        check_is_fitted(self, "plan_")
        return [apply_stages(self.plan_.stages, self.plan_.times, p, self.precision) for p in points]


def build_transitivity_plan(stages, points, target, tol: float = 1e-9, max_iter: int = 100,
                            precision: int = DEFAULT_PRECISION) -> TransitivityPlan:
    planner = TransitivityPlanner(stages, tol=tol, max_iter=max_iter, precision=precision)
    return planner.fit(points, target).plan_


@dataclass
class SeparationResult:
    points: list
    moves: list = field(default_factory=list)  # (point index, stage index, time)
    residuals: list = field(default_factory=list)


def perturb_to_separated(stages, points, time=Fraction(1, 8), max_rounds: int = 20,
                         precision: int = DEFAULT_PRECISION) -> SeparationResult:
    """Flow colliding points apart until every integral separates them.

    A collision ``f_j(x_i) = f_j(x_l)`` is broken by a short flow of
    ``p_k(f_k) sigma_k`` for some stage with ``sigma_k(f_j) != 0`` at the
    moving point, where ``p_k`` is 1 there and vanishes at the other points.
    """
    if not stages:
        raise InputError("perturbation needs at least one stage")
    ring = stages[0][0].ring
    prepared = [(s if s.is_certified else s.certified(), ring.normal_form(f)) for s, f in stages]
    pts = [_coords(p) for p in points]
    result = SeparationResult(pts)
    for _ in range(max_rounds):
        clash = separation_violation(prepared, pts)
        if clash is None:
            result.points = pts
            with mpmath.workprec(precision):
                result.residuals = [relation_residual(ring, p) for p in pts]
            return result
        j, i, l = clash
        f_j = prepared[j][1]
        moved = False
        for mover in (i, l):
            for k, (sigma_k, f_k) in enumerate(prepared):
                if _evaluate(sigma_k.apply(f_j), pts[mover]) == 0:
                    continue
                fk_vals = [_evaluate(f_k, p) for p in pts]
                rest = [fk_vals[q] for q in range(len(pts)) if q != mover]
                if any(v == fk_vals[mover] for v in rest):
                    continue
                sel = lagrange_selector([_to_fraction(v) for v in rest], _to_fraction(fk_vals[mover]))
                h = ring.normal_form(sel.compose({"s": f_k.rep}, ring.vars))
                _, F = _stage_flow(sigma_k, h)
                t = Fraction(time)
                other = l if mover == i else i
                for _ in range(30):
                    img = flow_evaluate(F, t, pts[mover], precision).coords
                    if _evaluate(f_j, img) != _evaluate(f_j, pts[other]):
                        break
                    t /= 2
                else:
                    continue
                new_pts = list(pts)
                new_pts[mover] = img
                for q in range(len(pts)):
                    if q != mover and _coords(flow_evaluate(F, t, pts[q], precision).coords) != pts[q]:
                        raise AssertionError("perturbation moved a point it should freeze")
                pts = new_pts
                result.moves.append((mover, k, t))
                moved = True
                break
            if moved:
                break
        if not moved:
            raise SeparationError(
                f"cannot separate points {i + 1} and {l + 1}: no stage field moves integral {f_j}",
                stage=j, pair=(i, l))
    raise SeparationError("separation did not finish within the round limit")
