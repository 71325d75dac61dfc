"""Affine varieties as quotient rings QQ[x]/I.

The relation ideal is handled through a reduced Groebner basis for grlex,
computed by a plain Buchberger loop that also records how each basis element
is a combination of the original generators.  That record is what lets
tangency checks return cofactors with respect to the *given* relations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import Polynomial, grlex_key
from .errors import BudgetExceeded, InputError, VarlistMismatch
from .linalg import IncrementalSpan, rank

DEFAULT_SPAIR_BUDGET = 100_000


def _lcm(a: tuple, b: tuple) -> tuple:
    return tuple(max(i, j) for i, j in zip(a, b))


def _divides(a: tuple, b: tuple) -> bool:
    return all(i <= j for i, j in zip(a, b))


@dataclass
class _Tracked:
    poly: Polynomial
    rep: list  # poly == sum(rep[k] * gens[k])


def _reduce_tracked(t: _Tracked, basis: list[_Tracked], full: bool = True) -> _Tracked:
    if not basis:
        return t
    quots, rem = t.poly.divide([b.poly for b in basis])
    rep = list(t.rep)
    for q, b in zip(quots, basis):
        if q:
            rep = [r - q * br for r, br in zip(rep, b.rep)]
    return _Tracked(rem, rep)


def _monic(t: _Tracked) -> _Tracked:
    lc = t.poly.leading_coefficient()
    if lc == 1:
        return t
    inv = 1 / lc
    return _Tracked(t.poly * inv, [r * inv for r in t.rep])


def _groebner_tracked(relations: Sequence[Polynomial], budget: int) -> tuple[list[Polynomial], list[_Tracked]]:
    gens = [g for g in relations if not g.is_zero()]
    if not gens:
        return [], []
    vars = gens[0].vars
    for g in gens:
        if g.vars != vars:
            raise VarlistMismatch("relations use different variable lists")
    r = len(gens)
    zero = Polynomial.zero(vars)
    one = Polynomial.constant(1, vars)
    basis: list[_Tracked] = []
    for k, g in enumerate(gens):
        t = _Tracked(g, [one if j == k else zero for j in range(r)])
        t = _reduce_tracked(t, basis)
        if not t.poly.is_zero():
            basis.append(_monic(t))
    pairs = list(itertools.combinations(range(len(basis)), 2))
    steps = 0
    while pairs:
        steps += 1
        if steps > budget:
            raise BudgetExceeded(f"Buchberger exceeded its budget of {budget} S-pairs")
        i, j = pairs.pop(0)
        bi, bj = basis[i], basis[j]
        ei, ej = bi.poly.leading()[0], bj.poly.leading()[0]
        if all(min(a, b) == 0 for a, b in zip(ei, ej)):
            continue  # coprime leading monomials
        L = _lcm(ei, ej)
        mi = Polynomial.monomial([a - b for a, b in zip(L, ei)], vars)
        mj = Polynomial.monomial([a - b for a, b in zip(L, ej)], vars)
        s = _Tracked(mi * bi.poly - mj * bj.poly, [mi * a - mj * b for a, b in zip(bi.rep, bj.rep)])
        s = _reduce_tracked(s, basis)
        if not s.poly.is_zero():
            basis.append(_monic(s))
            n = len(basis) - 1
            pairs.extend((k, n) for k in range(n))
    # minimise
    minimal = []
    for k, b in enumerate(basis):
        lk = b.poly.leading()[0]
        dominated = False
        for m, c in enumerate(basis):
            if m == k:
                continue
            lm = c.poly.leading()[0]
            if _divides(lm, lk) and (lm != lk or m < k):
                dominated = True
                break
        if not dominated:
            minimal.append(b)
    # interreduce
    reduced = []
    for k, b in enumerate(minimal):
        others = [c for m, c in enumerate(minimal) if m != k]
        reduced.append(_monic(_reduce_tracked(b, others)))
    reduced.sort(key=lambda t: grlex_key(t.poly.leading()[0]), reverse=True)
    return [t.poly for t in reduced], reduced


def groebner_basis(relations: Sequence[Polynomial], budget: int = DEFAULT_SPAIR_BUDGET) -> list[Polynomial]:
    """Reduced grlex Groebner basis (monic, sorted by leading monomial)."""
    return _groebner_tracked(relations, budget)[0]


class CoordinateRing:
    """The ring QQ[vars]/(relations).

    ``codim`` is the codimension used for smoothness tests; it defaults to the
    number of relations, which is right for complete intersections (every
    variety shipped with the corpus is one).
    """

    def __init__(self, vars: Sequence[str], relations: Iterable = (), name: str | None = None,
                 codim: int | None = None, budget: int = DEFAULT_SPAIR_BUDGET):
        from .parsing import parse_polynomial

        self.vars = tuple(vars)
        rels = []
        for g in relations:
            if isinstance(g, str):
                g = parse_polynomial(g, self.vars)
            elif g.vars != self.vars:
                g = g.in_vars(self.vars)
            if not g.is_zero():
                rels.append(g)
        self.relations = tuple(rels)
        self.name = name
        self.codim = len([g for g in rels if not g.is_zero()]) if codim is None else codim
        self.groebner, self._tracked = _groebner_tracked(self.relations, budget)
        self._leads = [g.leading()[0] for g in self.groebner]

    def __repr__(self):
        rels = ", ".join(str(g) for g in self.relations)
        return f"CoordinateRing({self.name or '?'}: vars={self.vars}, relations=[{rels}])"

    def __eq__(self, other):
        if not isinstance(other, CoordinateRing):
            return NotImplemented
        return self.vars == other.vars and self.groebner == other.groebner

    def __hash__(self):
        return hash((self.vars, tuple(self.groebner)))

    @property
    def dim(self) -> int:
        return len(self.vars) - self.codim

    def poly(self, p) -> Polynomial:
        from .parsing import parse_polynomial

        if isinstance(p, RingElement):
            return p.rep
        if isinstance(p, str):
            return parse_polynomial(p, self.vars)
        if isinstance(p, Polynomial):
            return p if p.vars == self.vars else p.in_vars(self.vars)
        return Polynomial.constant(p, self.vars)

    def var(self, name: str) -> "RingElement":
        return RingElement(self, Polynomial.var(name, self.vars))

    def gens(self) -> tuple["RingElement", ...]:
        return tuple(self.var(v) for v in self.vars)

    def nf(self, p) -> Polynomial:
        p = self.poly(p)
        if not self.groebner or p.is_zero():
            return p
        return p.divide(self.groebner)[1]

    def normal_form(self, p) -> "RingElement":
        return RingElement(self, self.nf(p))

    __call__ = normal_form

    def contains(self, p) -> bool:
        return self.nf(p).is_zero()

    def cofactors(self, p) -> tuple[list[Polynomial], Polynomial]:
        """``(h, r)`` with ``p == sum(h[k]*relations[k]) + r`` and ``r`` reduced."""
        p = self.poly(p)
        r = len(self.relations)
        zero = Polynomial.zero(self.vars)
        if not self.groebner:
            return [zero] * r, p
        quots, rem = p.divide(self.groebner)
        h = [zero] * r
        for q, t in zip(quots, self._tracked):
            if q:
                h = [a + q * b for a, b in zip(h, t.rep)]
        return h, rem

    def is_standard(self, exps: tuple) -> bool:
        return not any(_divides(le, exps) for le in self._leads)

    def standard_monomials(self, max_degree: int) -> list[tuple]:
        """Exponent vectors of degree <= max_degree not divisible by a leading monomial."""
        out = []
        n = len(self.vars)
        for d in range(max_degree + 1):
            for e in _exponents_of_degree(n, d):
                if self.is_standard(e):
                    out.append(e)
        out.sort(key=grlex_key, reverse=True)
        return out

    def jacobian_at(self, coords: Sequence) -> list[list]:
        return [[g.diff(v).evaluate(coords) for v in self.vars] for g in self.relations]

    def is_smooth_at(self, coords: Sequence) -> bool:
        if not self.relations:
            return True
        return rank(self.jacobian_at(coords)) == self.codim

    def point(self, coords: Sequence) -> "Point":
        return Point.on(self, coords)


def _exponents_of_degree(n: int, d: int):
    if n == 0:
        if d == 0:
            yield ()
        return
    if n == 1:
        yield (d,)
        return
    for k in range(d, -1, -1):
        for rest in _exponents_of_degree(n - 1, d - k):
            yield (k,) + rest


def exponents_up_to(n: int, max_degree: int) -> list[tuple]:
    return [e for d in range(max_degree + 1) for e in _exponents_of_degree(n, d)]


class RingElement:
    """An element of a coordinate ring, stored by its normal form."""

    __slots__ = ("ring", "rep")

    def __init__(self, ring: CoordinateRing, p, reduced: bool = False):
        self.ring = ring
        self.rep = ring.poly(p) if reduced else ring.nf(p)

    def _other(self, other) -> Polynomial:
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise InputError("ring elements belong to different rings")
            return other.rep
        return self.ring.poly(other)

    def __add__(self, other):
        return RingElement(self.ring, self.rep + self._other(other), reduced=True)

    __radd__ = __add__

    def __sub__(self, other):
        return RingElement(self.ring, self.rep - self._other(other), reduced=True)

    def __rsub__(self, other):
        return RingElement(self.ring, self._other(other) - self.rep, reduced=True)

    def __neg__(self):
        return RingElement(self.ring, -self.rep, reduced=True)

    def __mul__(self, other):
        return RingElement(self.ring, self.rep * self._other(other))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = RingElement(self.ring, Polynomial.constant(1, self.ring.vars), reduced=True)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, RingElement):
            return self.ring == other.ring and self.rep == other.rep
        try:
            return self.rep == self.ring.nf(self._other(other))
        except InputError:
            return NotImplemented

    def __hash__(self):
        return hash(self.rep)

    def is_zero(self) -> bool:
        return self.rep.is_zero()

    def __bool__(self):
        return not self.rep.is_zero()

    def evaluate(self, coords, coerce=None):
        return self.rep.evaluate(coords, coerce)

    def __str__(self):
        return str(self.rep)

    def __repr__(self):
        return f"RingElement({self.rep!s})"


@dataclass(frozen=True)
class Point:
    """A rational point lying exactly on a variety."""

    coords: tuple
    ring: CoordinateRing | None = field(default=None, compare=False, repr=False)

    @classmethod
    def on(cls, ring: CoordinateRing, coords: Sequence) -> "Point":
        cs = tuple(Fraction(c) if not isinstance(c, Fraction) else c for c in coords)
        if len(cs) != len(ring.vars):
            raise InputError(f"point needs {len(ring.vars)} coordinates, got {len(cs)}")
        for g in ring.relations:
            val = g.evaluate(cs)
            if val != 0:
                raise InputError(f"point {tuple(map(str, cs))} is not on the variety: {g} = {val}")
        return cls(cs, ring)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class UnitCertificate:
    """Cofactors with ``sum(cofactors[i] * generators[i]) == 1``."""

    generators: tuple
    cofactors: tuple
    degree_bound: int

    def combination(self) -> Polynomial:
        total = Polynomial.zero(self.generators[0].vars)
        for c, g in zip(self.cofactors, self.generators):
            total = total + c * g
        return total

    def verify(self) -> bool:
        return self.combination() == 1


def unit_ideal_certificate(gens: Sequence[Polynomial], degree_bound: int) -> UnitCertificate | None:
    """Search for ``sum c_i g_i == 1`` with ``deg c_i <= D`` for D = 0..degree_bound.

    Returns the certificate for the first D that works, or None, meaning
    *inconclusive up to degree_bound*: a bounded search never refutes.
    """
    gens = [g for g in gens]
    if not gens:
        raise InputError("unit_ideal_certificate needs at least one generator")
    vars = gens[0].vars
    for g in gens:
        if g.vars != vars:
            raise VarlistMismatch("generators use different variable lists")
    n = len(vars)
    one = {(0,) * n: Fraction(1)}
    span = IncrementalSpan()
    for D in range(degree_bound + 1):
        for e in _exponents_of_degree(n, D):
            for i, g in enumerate(gens):
                if g.is_zero():
                    continue
                col = {tuple(a + b for a, b in zip(ge, e)): c for ge, c in g.term_dict().items()}
                span.add(col, (i, e))
        coords = span.express(one)
        if coords is not None:
            cof = [dict() for _ in gens]
            for (i, e), c in coords.items():
                cof[i][e] = cof[i].get(e, 0) + c
            cert = UnitCertificate(tuple(gens), tuple(Polynomial(c, vars) for c in cof), D)
            if not cert.verify():
                raise AssertionError("unit certificate failed to re-verify")
            return cert
    return None
