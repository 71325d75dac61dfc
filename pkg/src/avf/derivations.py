"""Polynomial vector fields as derivations of a coordinate ring.

Fields are stored in ambient coordinates, one normal-form coefficient per
variable.  Being a field *on* the variety is a certificate: a cofactor matrix
``H`` with ``v(g_i) = sum_j H[i][j] * g_j`` for the relation generators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import Polynomial
from .errors import InputError, NotTangentError
from .linalg import mat_vec, rank
from .varieties import CoordinateRing, Point, RingElement


class VectorField:
    __slots__ = ("ring", "coeffs", "tangency", "name")

    def __init__(self, ring: CoordinateRing, coeffs, name: str | None = None, tangency=None):
        self.ring = ring
        if isinstance(coeffs, Mapping):
            unknown = set(coeffs) - set(ring.vars)
            if unknown:
                raise InputError(f"coefficients for unknown variables {sorted(unknown)}")
            coeffs = [coeffs.get(v, 0) for v in ring.vars]
        coeffs = list(coeffs)
        if len(coeffs) != len(ring.vars):
            raise InputError(f"need {len(ring.vars)} coefficients, got {len(coeffs)}")
        self.coeffs = tuple(ring.nf(c) for c in coeffs)
        self.name = name
        self.tangency = tangency

    @classmethod
    def on(cls, ring: CoordinateRing, coeffs, name: str | None = None) -> "VectorField":
        """Construct a field and require it to be tangent to the variety."""
        return cls(ring, coeffs, name).certified()

    @property
    def vars(self) -> tuple:
        return self.ring.vars

    @property
    def is_certified(self) -> bool:
        return self.tangency is not None or not self.ring.relations

    def certified(self) -> "VectorField":
        if self.tangency is not None:
            return self
        result = tangency_check(self)
        if not result.ok:
            raise NotTangentError(
                f"field {self.name or self} is not tangent: residuals "
                + ", ".join(str(r) for r in result.residuals),
                result.residuals,
            )
        return VectorField(self.ring, self.coeffs, self.name, tangency=result.cofactors)

    def coeff(self, var: str) -> Polynomial:
        return self.coeffs[self.ring.vars.index(var)]

    def apply_ambient(self, p: Polynomial) -> Polynomial:
        """``sum coeff_i * dp/dx_i`` in the ambient ring (no reduction)."""
        p = self.ring.poly(p)
        total = Polynomial.zero(self.ring.vars)
        for i, c in enumerate(self.coeffs):
            if c:
                d = p.diff(i)
                if d:
                    total = total + c * d
        return total

    def apply(self, f) -> RingElement:
        if isinstance(f, RingElement) and f.ring != self.ring:
            raise InputError("field and function live on different rings")
        return RingElement(self.ring, self.apply_ambient(f))

    __call__ = apply

    def iterate(self, f, n: int) -> RingElement:
        out = self.ring.normal_form(f)
        for _ in range(n):
            out = self.apply(out)
        return out

    def degree(self) -> int:
        return max((c.degree() for c in self.coeffs), default=-1)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def evaluate(self, coords, coerce=None) -> tuple:
        return tuple(c.evaluate(coords, coerce) for c in self.coeffs)

    def _check(self, other: "VectorField"):
        if not isinstance(other, VectorField):
            raise InputError(f"expected a vector field, got {type(other).__name__}")
        if other.ring != self.ring:
            raise InputError("vector fields live on different rings")

    def __add__(self, other):
        self._check(other)
        return VectorField(self.ring, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return VectorField(self.ring, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return VectorField(self.ring, [-a for a in self.coeffs], tangency=_neg_h(self.tangency))

    def scale(self, f) -> "VectorField":
        """The field ``f * self`` for a function or constant ``f``."""
        f = self.ring.poly(f)
        return VectorField(self.ring, [f * c for c in self.coeffs])

    def __mul__(self, f):
        return self.scale(f)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.ring == other.ring and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def coeff_dict(self) -> dict:
        return {v: str(c) for v, c in zip(self.ring.vars, self.coeffs)}

    def __str__(self):
        parts = []
        for v, c in zip(self.ring.vars, self.coeffs):
            if c.is_zero():
                continue
            s = str(c)
            if len(c) > 1:
                s = f"({s})"
            parts.append({"1": "", "-1": "-"}.get(s, s + "*") + f"d/d{v}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"

    def __repr__(self):
        label = f"{self.name}: " if self.name else ""
        return f"VectorField({label}{self})"


def _neg_h(h):
    if h is None:
        return None
    return tuple(tuple(-x for x in row) for row in h)


def apply(v: VectorField, f) -> RingElement:
    return v.apply(f)


def bracket(v: VectorField, w: VectorField) -> VectorField:
    """Lie bracket ``[v, w]`` with coefficients ``v(w_i) - w(v_i)``."""
    v._check(w)
    coeffs = [v.apply_ambient(wi) - w.apply_ambient(vi) for vi, wi in zip(v.coeffs, w.coeffs)]
    return VectorField(v.ring, coeffs)


@dataclass
class TangencyResult:
    ok: bool
    cofactors: tuple | None  # H with v(g_i) = sum_j H[i][j] g_j
    values: list  # v(g_i) computed in the ambient ring
    residuals: list = field(default_factory=list)  # nonzero normal forms of v(g_i)

    def __bool__(self):
        return self.ok


def tangency_check(v: VectorField) -> TangencyResult:
    ring = v.ring
    values, rows, residuals = [], [], []
    for g in ring.relations:
        val = v.apply_ambient(g)
        values.append(val)
        h, rem = ring.cofactors(val)
        rows.append(tuple(h))
        if not rem.is_zero():
            residuals.append(rem)
    if residuals:
        return TangencyResult(False, None, values, residuals)
    H = tuple(rows)
    for val, row in zip(values, H):
        total = Polynomial.zero(ring.vars)
        for h, g in zip(row, ring.relations):
            total = total + h * g
        if total != val:
            raise AssertionError("cofactor identity failed to re-verify")
    return TangencyResult(True, H, values, [])


def kernel_member(v: VectorField, f) -> bool:
    return v.apply(f).is_zero()


@dataclass
class SpanReport:
    point: Point
    field_values: list
    tangent_rank: int
    dimension: int
    verdict: str  # "spans" or "deficient"

    @property
    def spans(self) -> bool:
        return self.verdict == "spans"


def span_at_point(fields: Sequence[VectorField], p, ring: CoordinateRing | None = None) -> SpanReport:
    """Exact rank of the field values at a smooth point of the variety."""
    if ring is None:
        if fields:
            ring = fields[0].ring
        elif isinstance(p, Point) and p.ring is not None:
            ring = p.ring
        else:
            raise InputError("span_at_point needs a ring when no fields are given")
    point = p if isinstance(p, Point) and p.ring is not None else Point.on(ring, p)
    if not ring.is_smooth_at(point.coords):
        raise InputError(f"point {point} is a singular point of the variety")
    jac = ring.jacobian_at(point.coords)
    values = []
    for f in fields:
        if f.ring != ring:
            raise InputError("fields live on different rings")
        if not f.is_certified:
            f.certified()
        val = f.evaluate(point.coords)
        if any(x != 0 for x in mat_vec(jac, val)):
            raise AssertionError("certified field value leaves the tangent space")
        values.append(val)
    dimension = len(ring.vars) - (rank(jac) if jac else 0)
    r = rank(values) if values else 0
    return SpanReport(point, values, r, dimension, "spans" if r == dimension else "deficient")
