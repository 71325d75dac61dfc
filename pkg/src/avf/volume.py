"""Volume forms on charts and the divergence operator.

A :class:`VolumeChart` picks chart coordinates among the ambient variables,
expresses the remaining variables as rational functions of them and fixes
``omega = unit * dx_1 ^ ... ^ dx_d``.  With that,

    div(nu) = sum_i d(nu_i)/dx_i + nu(unit) / unit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import Polynomial, RationalFunction, as_rational_function, poly_substitute
from .derivations import VectorField
from .errors import InputError, NotTangentError
from .varieties import CoordinateRing


class VolumeChart:
    def __init__(self, ring: CoordinateRing, chart_vars: Sequence[str],
                 substitutions: Mapping[str, object] | None = None, unit=1,
                 domain_note: str = "", name: str | None = None):
        from .parsing import parse_rational

        self.ring = ring
        self.name = name
        self.chart_vars = tuple(chart_vars)
        vars = ring.vars
        for v in self.chart_vars:
            if v not in vars:
                raise InputError(f"chart variable {v!r} is not a coordinate")
        subs = {}
        for v, e in (substitutions or {}).items():
            if v not in vars or v in self.chart_vars:
                raise InputError(f"substitution target {v!r} must be a non-chart coordinate")
            r = parse_rational(e, vars) if isinstance(e, str) else as_rational_function(e, vars)
            if not (r.num.used_vars() | r.den.used_vars()) <= set(self.chart_vars):
                raise InputError(f"substitution for {v!r} uses non-chart variables")
            subs[v] = r
        missing = [v for v in vars if v not in self.chart_vars and v not in subs]
        if missing:
            raise InputError(f"no substitution for {missing}")
        self.substitutions = subs
        self.unit = parse_rational(unit, vars) if isinstance(unit, str) else as_rational_function(unit, vars)
        if self.unit.is_zero():
            raise InputError("volume unit must be nonzero")
        self.domain_note = domain_note
        for g in ring.relations:
            if not poly_substitute(g, self.substitutions).is_zero():
                raise InputError(f"relation {g} does not vanish under the chart substitution")

    @classmethod
    def standard(cls, ring: CoordinateRing) -> "VolumeChart":
        """``dx_1 ^ ... ^ dx_n`` on affine space."""
        if ring.relations:
            raise InputError("the standard volume chart needs a ring without relations")
        return cls(ring, ring.vars, {}, 1, domain_note="whole affine space")

    def with_unit(self, unit) -> "VolumeChart":
        return VolumeChart(self.ring, self.chart_vars, self.substitutions, unit, self.domain_note, self.name)

    def to_chart(self, p) -> RationalFunction:
        """Pull an ambient polynomial (or rational function) back to the chart."""
        if isinstance(p, RationalFunction):
            return poly_substitute(p.num, self.substitutions) / poly_substitute(p.den, self.substitutions)
        return poly_substitute(self.ring.poly(p), self.substitutions)

    def lift(self, chart_coords: Sequence) -> tuple:
        """Ambient coordinates of the chart point ``chart_coords``."""
        vals = dict(zip(self.chart_vars, chart_coords))
        full = [vals.get(v, Fraction(0)) for v in self.ring.vars]
        out = []
        for v, x in zip(self.ring.vars, full):
            out.append(self.substitutions[v].evaluate(full) if v in self.substitutions else x)
        return tuple(out)

    def sample_points(self, n: int, seed: int = 0, extra=()) -> list[tuple]:
        """``n`` random rational chart points where substitutions and unit are defined."""
        rnd = random.Random(seed)
        dens = [r.den for r in self.substitutions.values()] + [self.unit.num, self.unit.den]
        dens += [e.den for e in extra]
        out = []
        while len(out) < n:
            chart = [Fraction(rnd.randint(-19, 19), rnd.randint(1, 7)) for _ in self.chart_vars]
            full = dict(zip(self.chart_vars, chart))
            amb = [full.get(v, Fraction(0)) for v in self.ring.vars]
            if any(d.evaluate(amb) == 0 for d in dens):
                continue
            out.append(tuple(chart))
        return out

    def __repr__(self):
        subs = ", ".join(f"{v} = {r}" for v, r in self.substitutions.items())
        return f"VolumeChart(chart={self.chart_vars}, {subs}, unit={self.unit})"


class ChartField:
    """A vector field written in chart coordinates with rational coefficients."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart: VolumeChart, coeffs):
        self.chart = chart
        vars = chart.ring.vars
        if isinstance(coeffs, Mapping):
            coeffs = [coeffs.get(v, 0) for v in chart.chart_vars]
        coeffs = list(coeffs)
        if len(coeffs) != len(chart.chart_vars):
            raise InputError("chart field needs one coefficient per chart variable")
        self.coeffs = tuple(as_rational_function(c, vars) for c in coeffs)

    def coeff(self, var: str) -> RationalFunction:
        return self.coeffs[self.chart.chart_vars.index(var)]

    def apply(self, g) -> RationalFunction:
        g = as_rational_function(g, self.chart.ring.vars)
        total = as_rational_function(0, self.chart.ring.vars)
        for v, c in zip(self.chart.chart_vars, self.coeffs):
            if not c.is_zero():
                d = g.diff(v)
                if not d.is_zero():
                    total = total + c * d
        return total

    __call__ = apply

    def scale(self, f) -> "ChartField":
        return ChartField(self.chart, [as_rational_function(f, self.chart.ring.vars) * c for c in self.coeffs])

    def __add__(self, other: "ChartField"):
        return ChartField(self.chart, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "ChartField"):
        return ChartField(self.chart, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __eq__(self, other):
        if not isinstance(other, ChartField):
            return NotImplemented
        return all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def evaluate(self, chart_coords) -> tuple:
        vals = dict(zip(self.chart.chart_vars, chart_coords))
        amb = [vals.get(v, Fraction(0)) for v in self.chart.ring.vars]
        return tuple(c.evaluate(amb) for c in self.coeffs)

    def __str__(self):
        parts = []
        for v, c in zip(self.chart.chart_vars, self.coeffs):
            if not c.is_zero():
                s = str(c)
                s = f"({s})" if " " in s else s
                parts.append({"1": "", "-1": "-"}.get(s, s + "*") + f"d/d{v}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"

    def __repr__(self):
        return f"ChartField({self})"


def chart_bracket(v: ChartField, w: ChartField) -> ChartField:
    return ChartField(v.chart, [v.apply(wi) - w.apply(vi) for vi, wi in zip(v.coeffs, w.coeffs)])


def restrict_to_chart(v: VectorField, c: VolumeChart, samples: int = 10, seed: int = 0) -> ChartField:
    """Write a tangent field in chart coordinates, checked at random chart points.

    At each sample point the chart coefficients must agree with the ambient
    field, and each substituted coordinate must move as the chain rule
    predicts from the chart components.
    """
    if v.ring != c.ring:
        raise InputError("field and chart live on different rings")
    if not v.is_certified:
        v = v.certified()
    cf = ChartField(c, [c.to_chart(v.coeff(x)) for x in c.chart_vars])
    vars = c.ring.vars
    for pt in c.sample_points(samples, seed):
        amb = c.lift(pt)
        vals = dict(zip(c.chart_vars, pt))
        chart_pt = [vals.get(x, Fraction(0)) for x in vars]
        chart_vals = cf.evaluate(pt)
        amb_vals = v.evaluate(amb)
        for x, cv in zip(c.chart_vars, chart_vals):
            if cv != amb_vals[vars.index(x)]:
                raise InputError(f"chart restriction disagrees with the field at {pt}")
        for s, r in c.substitutions.items():
            pushed = sum((cv * r.diff(x).evaluate(chart_pt) for x, cv in zip(c.chart_vars, chart_vals)), Fraction(0))
            if pushed != amb_vals[vars.index(s)]:
                raise NotTangentError(f"component d/d{s} is inconsistent with the chart at {pt}")
    return cf


def divergence(f: ChartField, c: VolumeChart | None = None) -> RationalFunction:
    c = c or f.chart
    if f.chart.chart_vars != c.chart_vars:
        raise InputError("chart dimensions do not match")
    total = as_rational_function(0, c.ring.vars)
    for x, a in zip(c.chart_vars, f.coeffs):
        total = total + a.diff(x)
    if not c.unit.den.is_constant() or not c.unit.num.is_constant():
        total = total + f.apply(c.unit) / c.unit
    return total


def field_divergence(v: VectorField, c: VolumeChart) -> RationalFunction:
    return divergence(restrict_to_chart(v, c), c)


@dataclass
class DivergenceIdentityReport:
    leibniz: bool  # div(f v) == f div(v) + v(f)
    bracket: bool  # div([v, w]) == v(div w) - w(div v)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.leibniz and self.bracket


def check_divergence_identities(v: ChartField, w: ChartField, f, c: VolumeChart | None = None) -> DivergenceIdentityReport:
    c = c or v.chart
    f = as_rational_function(f, c.ring.vars)
    lhs1 = divergence(v.scale(f), c)
    rhs1 = f * divergence(v, c) + v.apply(f)
    lhs2 = divergence(chart_bracket(v, w), c)
    rhs2 = v.apply(divergence(w, c)) - w.apply(divergence(v, c))
    return DivergenceIdentityReport(
        lhs1 == rhs1,
        lhs2 == rhs2,
        {"leibniz": (str(lhs1), str(rhs1)), "bracket": (str(lhs2), str(rhs2))},
    )
