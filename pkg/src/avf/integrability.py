"""Certified complete integrability and closed-form flows.

Two decidable classes of fields get flows:

* locally nilpotent fields, whose flow is the terminating series
  ``x(t) = sum_j t^j sigma^j(x) / j!``;
* kernel-linear fields, where every coordinate satisfies
  ``sigma(v) = a_v * v + b_v`` with ``a_v``, ``b_v`` first integrals, so that
  ``v(t) = exp(a_v t) v + b_v (exp(a_v t) - 1) / a_v``;
* triangular-linear fields, the same shape except that ``b_v`` may depend on
  coordinates solved earlier.  Their flows are exponential polynomials
  ``sum c t^m exp(lam t)`` built pointwise by exact integration.

Exp-units are evaluated with mpmath at a configurable binary precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath

from .algebra import Polynomial, RationalFunction, _as_fraction, poly_substitute
from .derivations import VectorField
from .errors import InputError
from .linalg import det
from .varieties import CoordinateRing, Point, RingElement

DEFAULT_BOUND = 64
DEFAULT_PRECISION = 256


def lnd_degree(sigma: VectorField, a, bound: int = DEFAULT_BOUND) -> int | None:
    """``min{n - 1 : sigma^n(a) = 0}``; -1 for ``a = 0``; None if not reached within ``bound``."""
    cur = sigma.ring.normal_form(a)
    if cur.is_zero():
        return -1
    for n in range(1, bound + 1):
        cur = sigma.apply(cur)
        if cur.is_zero():
            return n - 1
    return None


@dataclass(frozen=True)
class LNDCertificate:
    degrees: dict  # variable -> nilpotency degree
    bound_used: int

    def verify(self, sigma: VectorField) -> bool:
        for v, d in self.degrees.items():
            x = sigma.ring.var(v)
            if not sigma.iterate(x, d + 1).is_zero() or sigma.iterate(x, d).is_zero():
                return False
        return True


def lnd_certify(sigma: VectorField, bound: int = DEFAULT_BOUND) -> LNDCertificate | None:
    """Nilpotency degrees on the coordinate generators, or None (inconclusive)."""
    if not sigma.is_certified:
        sigma = sigma.certified()
    degrees = {}
    for v in sigma.ring.vars:
        d = lnd_degree(sigma, sigma.ring.var(v), bound)
        if d is None:
            return None
        degrees[v] = d
    return LNDCertificate(degrees, bound)


@dataclass(frozen=True)
class KernelLinearCertificate:
    """``sigma(v) = a_v * v + b_v`` with ``sigma(a_v) = sigma(b_v) = 0``."""

    linear: dict  # variable -> (a_v, b_v) as RingElements
    invariant: tuple  # variables killed by sigma

    def verify(self, sigma: VectorField) -> bool:
        for v, (a, b) in self.linear.items():
            x = sigma.ring.var(v)
            if sigma.apply(x) != a * x + b:
                return False
            if not sigma.apply(a).is_zero() or not sigma.apply(b).is_zero():
                return False
        return all(sigma.apply(sigma.ring.var(v)).is_zero() for v in self.invariant)

    def scaled(self, h: RingElement) -> "KernelLinearCertificate":
        """Certificate for ``h * sigma`` when ``h`` is a first integral."""
        return KernelLinearCertificate({v: (h * a, h * b) for v, (a, b) in self.linear.items()}, self.invariant)


@dataclass(frozen=True)
class KernelLinearFailure:
    unsatisfied: tuple

    def __bool__(self):
        return False


def kernel_linear_certify(sigma: VectorField, witness: Mapping | None = None):
    """Certify the kernel-linear structure of ``sigma``.

    Without a witness, ``sigma(v)`` is split by exact division by ``v``:
    terms divisible by ``v`` give ``a_v``, the rest ``b_v``.
    """
    if not sigma.is_certified:
        sigma = sigma.certified()
    ring = sigma.ring
    linear, invariant, bad = {}, [], []
    for i, v in enumerate(ring.vars):
        x = ring.var(v)
        s = sigma.apply(x)
        if witness and v in witness:
            a, b = (ring.normal_form(w) for w in witness[v])
        elif s.is_zero():
            invariant.append(v)
            continue
        else:
            (q,), r = s.rep.divide([x.rep])
            a, b = ring.normal_form(q), ring.normal_form(r)
        ok = s == a * x + b and sigma.apply(a).is_zero() and sigma.apply(b).is_zero()
        if ok:
            if a.is_zero() and b.is_zero():
                invariant.append(v)
            else:
                linear[v] = (a, b)
        else:
            bad.append(v)
    if bad:
        return KernelLinearFailure(tuple(bad))
    return KernelLinearCertificate(linear, tuple(invariant))


def semisimple_weights(sigma: VectorField) -> dict | None:
    """Rational weights ``w`` with ``sigma(x_i) = w_i x_i`` (diagonal semisimple), or None."""
    weights = {}
    for v in sigma.ring.vars:
        x = sigma.ring.var(v)
        s = sigma.apply(x)
        if s.is_zero():
            weights[v] = Fraction(0)
            continue
        (q,), r = s.rep.divide([x.rep])
        if not r.is_zero() or not q.is_constant():
            return None
        weights[v] = q.constant_value()
    return weights


@dataclass(frozen=True)
class TriangularLinearCertificate:
    """``sigma(v) = a_v * v + b_v`` with ``sigma(a_v) = 0`` and each ``b_v``
    either a first integral or a polynomial in invariant and earlier coordinates."""

    order: tuple  # non-invariant variables in solving order
    linear: dict  # variable -> (a_v, b_v) as RingElements
    invariant: tuple

    def _b_ok(self, sigma: VectorField, v: str, b: RingElement) -> bool:
        if sigma.apply(b).is_zero():
            return True
        allowed = set(self.invariant) | set(self.order[: self.order.index(v)])
        return b.rep.used_vars() <= allowed

    def verify(self, sigma: VectorField) -> bool:
        if set(self.order) != set(self.linear):
            return False
        for v in self.order:
            a, b = self.linear[v]
            x = sigma.ring.var(v)
            if sigma.apply(x) != a * x + b or not sigma.apply(a).is_zero():
                return False
            if not self._b_ok(sigma, v, b):
                return False
        return all(sigma.apply(sigma.ring.var(v)).is_zero() for v in self.invariant)

    def scaled(self, h: RingElement) -> "TriangularLinearCertificate":
        return TriangularLinearCertificate(
            self.order, {v: (h * a, h * b) for v, (a, b) in self.linear.items()}, self.invariant)


def triangular_certify(sigma: VectorField):
    """Solve coordinates one at a time; failure lists the unsolved ones."""
    if not sigma.is_certified:
        sigma = sigma.certified()
    ring = sigma.ring
    images = {v: sigma.apply(ring.var(v)) for v in ring.vars}
    invariant = [v for v in ring.vars if images[v].is_zero()]
    solved = set(invariant)
    order, linear = [], {}
    pending = [v for v in ring.vars if v not in solved]
    progress = True
    while pending and progress:
        progress = False
        for v in list(pending):
            x = ring.var(v)
            (q,), r = images[v].rep.divide([x.rep])
            a, b = ring.normal_form(q), ring.normal_form(r)
            if images[v] != a * x + b or not sigma.apply(a).is_zero():
                continue
            if not (sigma.apply(b).is_zero() or b.rep.used_vars() <= solved):
                continue
            order.append(v)
            linear[v] = (a, b)
            solved.add(v)
            pending.remove(v)
            progress = True
    if pending:
        return KernelLinearFailure(tuple(pending))
    return TriangularLinearCertificate(tuple(order), linear, tuple(invariant))


class ExpPoly:
    """``sum c * t^m * exp(lam * t)`` keyed by ``(lam, m)``, evaluated at one point."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: c for k, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, c) -> "ExpPoly":
        return cls({(0, 0): c})

    def __add__(self, other):
        other = other if isinstance(other, ExpPoly) else ExpPoly.const(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return ExpPoly(out)

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, ExpPoly):
            return ExpPoly({k: c * other for k, c in self.terms.items()})
        out = {}
        for (l1, m1), c1 in self.terms.items():
            for (l2, m2), c2 in other.terms.items():
                k = (l1 + l2, m1 + m2)
                out[k] = out.get(k, 0) + c1 * c2
        return ExpPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = ExpPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def solve_linear(self, a, x0) -> "ExpPoly":
        """Solution of ``v' = a v + self(t)`` with ``v(0) = x0``."""
        out = {(a, 0): x0}

        def put(k, c):
            out[k] = out.get(k, 0) + c

        for (lam, m), c in self.terms.items():
            mu = lam - a
            if mu == 0:
                put((a, m + 1), c / (m + 1))
                continue
            fact = 1
            for j in range(m + 1):
                # d^j-fold integration by parts: (-1)^j m!/(m-j)! t^(m-j) e^(lam t) / mu^(j+1)
                put((lam, m - j), c * (-1) ** j * fact / mu ** (j + 1))
                fact *= m - j
            put((a, 0), -c * (-1) ** m * math.factorial(m) / mu ** (m + 1))
        return ExpPoly(out)

    def at(self, t):
        exact = _is_exact(t) and all(_is_exact(c) and _is_exact(l) for (l, _), c in self.terms.items())
        if exact and all(l == 0 for (l, _) in self.terms):
            return sum((c * Fraction(t) ** m for (_, m), c in self.terms.items()), Fraction(0))
        tt = to_mpf(t)
        total = mpmath.mpf(0)
        for (lam, m), c in self.terms.items():
            total += to_mpf(c) * tt ** m * (mpmath.exp(to_mpf(lam) * tt) if lam != 0 else 1)
        return total


@dataclass(frozen=True)
class TriangularFormula:
    var: str
    a: Polynomial
    b: Polynomial
    tvar: str

    def __str__(self):
        a, b, t, v = self.a, self.b, self.tvar, self.var
        return f"exp(({a})*{t})*{v} + integral_0^{t} exp(({a})*({t}-s))*[{b}](s) ds"


# -- flows ---------------------------------------------------------------------


def _time_var(vars: tuple) -> str:
    name = "t"
    while name in vars:
        name += "_"
    return name


@dataclass(frozen=True)
class PolyFormula:
    poly: Polynomial  # over ring vars + (t,)

    def __str__(self):
        return str(self.poly)


@dataclass(frozen=True)
class ExpLinearFormula:
    var: str
    a: Polynomial
    b: Polynomial
    tvar: str

    def __str__(self):
        a, b, t, v = self.a, self.b, self.tvar, self.var
        ea = f"exp(({a})*{t})"
        s = f"{ea}*{v}"
        if b:
            s += f" + ({b})*({ea} - 1)/({a})"
        zero = f"{v} + ({b})*{t}" if b else v
        return f"{s}  [{zero} where {a} = 0]"


@dataclass(frozen=True)
class FlowExpression:
    field: VectorField
    formulas: tuple
    tvar: str
    order: tuple | None = None  # solving order for triangular flows

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(f, PolyFormula) for f in self.formulas)

    def polynomial_images(self, tvar: str | None = None) -> tuple:
        """Flow images as polynomials over ring vars + (tvar,)."""
        if not self.is_polynomial:
            raise InputError("flow is not polynomial")
        imgs = tuple(f.poly for f in self.formulas)
        if tvar and tvar != self.tvar:
            vars = self.field.ring.vars + (tvar,)
            imgs = tuple(
                p.compose({self.tvar: Polynomial.var(tvar, vars)}, vars) for p in imgs
            )
        return imgs

    def at_time(self, t) -> "PolyAutomorphism":
        t = _as_fraction(t)
        ring = self.field.ring
        vars = ring.vars
        ext = vars + (self.tvar,)
        imgs, inv = [], []
        for p in self.polynomial_images():
            imgs.append(p.compose({self.tvar: Polynomial.constant(t, ext)}, ext).in_vars(vars))
            inv.append(p.compose({self.tvar: Polynomial.constant(-t, ext)}, ext).in_vars(vars))
        return PolyAutomorphism(ring, tuple(imgs), tuple(inv))

    def __str__(self):
        return "\n".join(f"{v}({self.tvar}) = {f}" for v, f in zip(self.field.ring.vars, self.formulas))


def flow(sigma: VectorField, cert) -> FlowExpression:
    ring = sigma.ring
    vars = ring.vars
    t = _time_var(vars)
    ext = vars + (t,)
    T = Polynomial.var(t, ext)
    formulas = []
    if isinstance(cert, LNDCertificate):
        if not cert.verify(sigma):
            raise InputError("LND certificate does not match the field")
        for v in vars:
            x = ring.var(v)
            total = Polynomial.zero(ext)
            cur = x
            fact = 1
            for j in range(cert.degrees[v] + 1):
                if j:
                    cur = sigma.apply(cur)
                    fact *= j
                total = total + cur.rep.in_vars(ext) * T ** j * Fraction(1, fact)
            formulas.append(PolyFormula(total))
    elif isinstance(cert, KernelLinearCertificate):
        if not cert.verify(sigma):
            raise InputError("kernel-linear certificate does not match the field")
        for v in vars:
            X = Polynomial.var(v, ext)
            if v not in cert.linear:
                formulas.append(PolyFormula(X))
                continue
            a, b = cert.linear[v]
            if a.is_zero():
                formulas.append(PolyFormula(X + b.rep.in_vars(ext) * T))
            else:
                formulas.append(ExpLinearFormula(v, a.rep, b.rep, t))
    elif isinstance(cert, TriangularLinearCertificate):
        if not cert.verify(sigma):
            raise InputError("triangular-linear certificate does not match the field")
        for v in vars:
            if v not in cert.linear:
                formulas.append(PolyFormula(Polynomial.var(v, ext)))
                continue
            a, b = cert.linear[v]
            formulas.append(TriangularFormula(v, a.rep, b.rep, t))
        return FlowExpression(sigma, tuple(formulas), t, cert.order)
    else:
        raise InputError("flow needs an LND, kernel-linear or triangular-linear certificate")
    return FlowExpression(sigma, tuple(formulas), t)


def certify_flow(sigma: VectorField, bound: int = DEFAULT_BOUND) -> FlowExpression | None:
    """Flow from whichever certificate applies (LND first), or None."""
    cert = lnd_certify(sigma, bound)
    if cert is None:
        cert = kernel_linear_certify(sigma)
        if not cert:
            cert = triangular_certify(sigma)
            if not cert:
                return None
    return flow(sigma, cert)


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def to_mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return to_mpf(Fraction(x))
    return mpmath.mpf(x)


@dataclass(frozen=True)
class FlowImage:
    coords: tuple
    residual: object  # max |relation| at the image
    exact: bool

    def __iter__(self):
        return iter(self.coords)


def relation_residual(ring: CoordinateRing, coords) -> object:
    if all(_is_exact(c) for c in coords):
        return max((abs(g.evaluate(coords)) for g in ring.relations), default=Fraction(0))
    mp = [to_mpf(c) for c in coords]
    return max((abs(g.evaluate(mp, to_mpf)) for g in ring.relations), default=mpmath.mpf(0))


def flow_evaluate(F: FlowExpression, t, p, precision: int = DEFAULT_PRECISION) -> FlowImage:
    """Image of ``p`` under the time-``t`` flow.

    Rational data stays exact wherever no exp-unit is needed; ``a_v(p) = 0``
    is decided exactly and selects the linear branch.
    """
    ring = F.field.ring
    if isinstance(t, str):
        t = Fraction(t)
    coords = tuple(p.coords if isinstance(p, Point) else p)
    if len(coords) != len(ring.vars):
        raise InputError("point has the wrong number of coordinates")
    exact_in = all(_is_exact(c) for c in coords)
    if exact_in:
        coords = tuple(Fraction(c) for c in coords)
        if ring.relations and not isinstance(p, Point):
            Point.on(ring, coords)
    with mpmath.workprec(precision):
        if t == 0 or (exact_in and all(v == 0 for v in F.field.evaluate(coords))):
            return FlowImage(coords, relation_residual(ring, coords), exact_in)
        if F.order is not None:
            return _triangular_image(F, t, coords, exact_in)
        exact = exact_in and _is_exact(t)
        if exact:
            vals, tt = list(coords), Fraction(t)
        else:
            vals, tt = [to_mpf(c) for c in coords], to_mpf(t)
        conv = None if exact else to_mpf
        out = []
        for f in F.formulas:
            if isinstance(f, PolyFormula):
                out.append(f.poly.evaluate(vals + [tt], conv))
                continue
            a = f.a.evaluate(vals, conv)
            b = f.b.evaluate(vals, conv)
            x = vals[ring.vars.index(f.var)]
            if a == 0:
                out.append(x + b * tt)
                continue
            if exact:
                # exp-unit needed: leave the exact domain for this coordinate
                a, b, x, ttm = to_mpf(a), to_mpf(b), to_mpf(x), to_mpf(tt)
            else:
                ttm = tt
            e = mpmath.exp(a * ttm)
            out.append(e * x + b * mpmath.expm1(a * ttm) / a)
        is_exact = all(_is_exact(c) for c in out)
        return FlowImage(tuple(out), relation_residual(ring, out), is_exact)


def _triangular_image(F: FlowExpression, t, coords, exact_in: bool) -> FlowImage:
    ring = F.field.ring
    vars = ring.vars
    vals = list(coords) if exact_in else [to_mpf(c) for c in coords]
    conv = None if exact_in else to_mpf
    sol = {v: ExpPoly.const(vals[i]) for i, v in enumerate(vars) if v not in F.order}
    forms = {f.var: f for f in F.formulas if isinstance(f, TriangularFormula)}
    sigma = F.field
    for v in F.order:
        f = forms[v]
        a = f.a.evaluate(vals, conv)
        if sigma.apply(f.b).is_zero():
            b = ExpPoly.const(f.b.evaluate(vals, conv))
        else:
            b = f.b.evaluate([sol.get(w, ExpPoly.const(0)) for w in vars],
                             lambda c: ExpPoly.const(c if exact_in else to_mpf(c)))
        sol[v] = b.solve_linear(a, vals[vars.index(v)])
    out = [sol[v].at(t) for v in vars]
    return FlowImage(tuple(out), relation_residual(ring, out), all(_is_exact(c) for c in out))


def lnd_inverse_law(F: FlowExpression) -> bool:
    """``F(-t) o F(t) == id`` exactly, as polynomials modulo the ideal."""
    ring = F.field.ring
    vars = ring.vars
    t = F.tvar
    ext = vars + (t,)
    fwd = F.polynomial_images()
    back = [p.compose({t: -Polynomial.var(t, ext)}, ext) for p in fwd]
    images = {v: q for v, q in zip(vars, fwd)}
    ext_ring = CoordinateRing(ext, [g.in_vars(ext) for g in ring.relations])
    for v, b in zip(vars, back):
        comp = b.compose(images, ext)
        if not ext_ring.contains(comp - Polynomial.var(v, ext)):
            return False
    return True


def lnd_group_law(F: FlowExpression) -> bool:
    """``F(s) o F(t) == F(s + t)`` exactly, with ``s`` and ``t`` symbolic."""
    ring = F.field.ring
    vars = ring.vars
    s = F.tvar + "_s"
    while s in vars:
        s += "_"
    t = F.tvar
    ext = vars + (t, s)
    T, S = Polynomial.var(t, ext), Polynomial.var(s, ext)
    base = [p.in_vars(ext) for p in F.polynomial_images()]
    ft = {v: p for v, p in zip(vars, base)}
    ext_ring = CoordinateRing(ext, [g.in_vars(ext) for g in ring.relations])
    for p in base:
        fs = p.compose({t: S}, ext)
        lhs = fs.compose(ft, ext)
        rhs = p.compose({t: T + S}, ext)
        if not ext_ring.contains(lhs - rhs):
            return False
    return True


# -- automorphisms -------------------------------------------------------------


@dataclass(frozen=True)
class PolyAutomorphism:
    ring: CoordinateRing
    images: tuple
    inverse_images: tuple

    def __post_init__(self):
        n = len(self.ring.vars)
        if len(self.images) != n or len(self.inverse_images) != n:
            raise InputError("automorphism needs one image per variable")
        object.__setattr__(self, "images", tuple(self.ring.poly(p) for p in self.images))
        object.__setattr__(self, "inverse_images", tuple(self.ring.poly(p) for p in self.inverse_images))

    def apply(self, coords):
        return tuple(p.evaluate(coords) for p in self.images)


@dataclass
class AutomorphismReport:
    relations_ok: bool
    inverse_ok: bool
    volume_ok: bool | None
    jacobian_factor: object = None  # det(J) * (u o phi) / u
    failures: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.relations_ok and self.inverse_ok and self.volume_ok is not False


def _compose_maps(outer: Sequence[Polynomial], inner: Sequence[Polynomial], vars) -> list[Polynomial]:
    images = dict(zip(vars, inner))
    return [p.compose(images, vars) for p in outer]


def chart_jacobian_factor(images: Sequence[Polynomial], chart) -> RationalFunction:
    """``det(d phi_chart) * unit(phi) / unit`` as an exact rational function."""
    vars = chart.ring.vars
    cvars = chart.chart_vars
    comps = [chart.to_chart(images[vars.index(x)]) for x in cvars]
    jac = [[c.diff(x) for x in cvars] for c in comps]
    d = det(jac)
    subs = {x: c for x, c in zip(cvars, comps)}
    u = chart.unit
    u_phi = poly_substitute(u.num, subs) / poly_substitute(u.den, subs)
    return d * u_phi / u


def verify_automorphism(phi: PolyAutomorphism, chart=None) -> AutomorphismReport:
    ring = phi.ring
    vars = ring.vars
    failures = {}
    rel_ok = True
    for g in ring.relations:
        r = ring.nf(g.compose(dict(zip(vars, phi.images)), vars))
        if not r.is_zero():
            rel_ok = False
            failures.setdefault("relations", []).append(str(r))
    inv_ok = True
    for name, outer, inner in (("phi o phi^-1", phi.images, phi.inverse_images),
                               ("phi^-1 o phi", phi.inverse_images, phi.images)):
        for v, c in zip(vars, _compose_maps(outer, inner, vars)):
            r = ring.nf(c - Polynomial.var(v, vars))
            if not r.is_zero():
                inv_ok = False
                failures.setdefault(name, []).append(f"{v}: {r}")
    vol_ok, factor = None, None
    if chart is not None:
        factor = chart_jacobian_factor(phi.images, chart)
        vol_ok = factor == 1
        if not vol_ok:
            failures["volume"] = str(factor)
    return AutomorphismReport(rel_ok, inv_ok, vol_ok, factor, failures)


@dataclass
class NumericVolumeReport:
    ok: bool
    max_error: object
    tol: float
    samples: int


def verify_flow_volume(F: FlowExpression, chart, t, samples: int = 10, tol: float = 1e-9,
                       precision: int = DEFAULT_PRECISION, seed: int = 0) -> NumericVolumeReport:
    """Numeric form of the volume check for exp-unit flows.

    At sample chart points the chart Jacobian of the time-``t`` map is formed
    by central differences and ``det(J) * unit(phi) / unit`` is compared with
    1.  Differences run at twice ``precision`` with step ``2**-(precision/2)``
    so that fast-growing exp-units keep enough digits.
    """
    if F.is_polynomial and _is_exact(t if not isinstance(t, str) else Fraction(t)):
        factor = chart_jacobian_factor(F.at_time(t).images, chart)
        return NumericVolumeReport(factor == 1, Fraction(0) if factor == 1 else factor, tol, 0)
    ring = chart.ring
    vars = ring.vars
    cvars = chart.chart_vars
    idx = [vars.index(x) for x in cvars]
    worst = mpmath.mpf(0)
    work = 2 * precision
    with mpmath.workprec(work):
        h = mpmath.ldexp(1, -(precision // 2))
        for pt in chart.sample_points(samples, seed):
            base = [to_mpf(c) for c in pt]

            def lift(cc):
                full = {x: c for x, c in zip(cvars, cc)}
                amb = [full.get(v, mpmath.mpf(0)) for v in vars]
                out = []
                for v, val in zip(vars, amb):
                    out.append(chart.substitutions[v].evaluate(amb, to_mpf) if v in chart.substitutions else val)
                return out

            def chart_image(cc):
                img = flow_evaluate(F, t, lift(cc), work).coords
                return [to_mpf(img[k]) for k in idx], img

            jac = []
            for j in range(len(cvars)):
                up = list(base)
                dn = list(base)
                up[j] += h
                dn[j] -= h
                fu, _ = chart_image(up)
                fd, _ = chart_image(dn)
                jac.append([(a - b) / (2 * h) for a, b in zip(fu, fd)])
            jac = [list(r) for r in zip(*jac)]  # rows: image comps, cols: chart vars
            _, img = chart_image(base)
            amb0 = lift(base)
            u0 = chart.unit.evaluate(amb0, to_mpf)
            u1 = chart.unit.evaluate([to_mpf(c) for c in img], to_mpf)
            factor = det(jac) * u1 / u0
            worst = max(worst, abs(factor - 1))
    return NumericVolumeReport(bool(worst <= tol), worst, tol, samples)
