"""Named varieties, charts and field families used by the corpus and tests.

The surface ``S = {x + y + x*y*z = 1}`` carries two families of integrable
fields, both divergence free for ``omega = dx/x ^ dy/y`` on the torus chart:

* ``q(z) * nu1`` with ``nu1 = (1 + x*z) d/dx - (1 + y*z) d/dy``;
* lifts of ``p(x^k y^l) * (l*x d/dx - k*y d/dy)`` from the chart, where the
  ``d/dz`` component is forced by tangency.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .algebra import Polynomial
from .derivations import VectorField
from .errors import InputError
from .varieties import CoordinateRing
from .volume import VolumeChart

S_RELATION = "x+y+x*y*z-1"
TORUS_NOTE = "torus chart x*y != 0 of S (complement of the lines x = 0 and y = 0); z = (1-x-y)/(x*y)"


def surface_s() -> CoordinateRing:
    return CoordinateRing(("x", "y", "z"), [S_RELATION], name="S")


def sl2() -> CoordinateRing:
    return CoordinateRing(("a1", "a2", "b1", "b2"), ["a1*b2-a2*b1-1"], name="SL2")


def affine_space(n: int, prefix: str = "x") -> CoordinateRing:
    return CoordinateRing(tuple(f"{prefix}{i}" for i in range(1, n + 1)), [], name=f"C{n}")


def torus_chart(ring: CoordinateRing | None = None) -> VolumeChart:
    ring = ring or surface_s()
    return VolumeChart(ring, ("x", "y"), {"z": "(1-x-y)/(x*y)"}, "1/(x*y)", TORUS_NOTE, name="S-torus")


# -- S fields ------------------------------------------------------------------


def nu1(ring: CoordinateRing) -> VectorField:
    return VectorField.on(ring, {"x": "1+x*z", "y": "-(1+y*z)"}, name="nu1")


def s_type1(ring: CoordinateRing, q) -> VectorField:
    """``q(z) * nu1``; ``q`` is a polynomial (or text) in ``z``."""
    q = ring.poly(q)
    if not q.used_vars() <= {"z"}:
        raise InputError("type (1) multiplier must be a polynomial in z")
    return nu1(ring).scale(q).certified()


def s_type2(ring: CoordinateRing, k: int, l: int, p: Polynomial) -> VectorField:
    """Lift of ``p(x^k y^l) (l x d/dx - k y d/dy)`` to S.

    ``p`` is univariate in ``s``.  The ``d/dz`` coefficient is
    ``-(nu(x)(1+yz) + nu(y)(1+xz)) / (xy)``, an exact ambient division that
    succeeds when ``p(0) = 0``.
    """
    vars = ring.vars
    x, y, z = (Polynomial.var(v, vars) for v in vars)
    P = x ** k * y ** l
    pp = p.compose({"s": P}, vars)
    a = pp * l * x
    b = pp * (-k) * y
    num = -(a * (1 + y * z) + b * (1 + x * z))
    c = num.exact_quotient(x * y)
    if c is None:
        raise InputError(f"p = {p} does not give a polynomial lift for (k, l) = ({k}, {l})")
    return VectorField.on(ring, [a, b, c], name=f"type2({k},{l};{p})")


def _s_poly(e: int, coeff=1) -> Polynomial:
    return Polynomial.monomial((e,), ("s",), coeff)


TYPE2_WEIGHTS = ((1, 0), (0, 1), (1, 1), (2, 1))


def s_family_instances(ring: CoordinateRing, max_degree: int = 3) -> list[VectorField]:
    """Monomial instances: ``z^j nu1`` for j <= max_degree and type (2) lifts
    with ``p = s^j``, 1 <= j <= max_degree, for every weight pair."""
    out = []
    for j in range(max_degree + 1):
        f = s_type1(ring, Polynomial.monomial((0, 0, j), ring.vars))
        f.name = f"z^{j}*nu1"
        out.append(f)
    for k, l in TYPE2_WEIGHTS:
        for j in range(1, max_degree + 1):
            out.append(s_type2(ring, k, l, _s_poly(j)))
    return out


def s_closure_generators(ring: CoordinateRing, d: int = 3) -> list[VectorField]:
    """Family instances whose coefficients have degree <= d."""
    return [f for f in s_family_instances(ring, d) if f.degree() <= d]


def s_spanning_fields(ring: CoordinateRing) -> list[VectorField]:
    """``nu1 = (1+xz)d/dx - (1+yz)d/dy``, ``xy d/dx - (1+yz) d/dz`` and the
    corrected ``xy d/dy - (1+xz) d/dz`` with first integrals z, y, x."""
    return [
        nu1(ring),
        VectorField.on(ring, {"x": "x*y", "z": "-(1+y*z)"}, name="sigma2"),
        VectorField.on(ring, {"y": "x*y", "z": "-(1+x*z)"}, name="sigma3"),
    ]


def s_printed_third_field(ring: CoordinateRing) -> VectorField:
    """The third field as misprinted, ``xy d/dx - (1+xz) d/dz``; not tangent."""
    return VectorField(ring, {"x": "x*y", "z": "-(1+x*z)"}, name="printed-third")


S_INTEGRALS = ("z", "y", "x")


def s_lines() -> list[dict]:
    """The five polynomial lines on S with their defining functions."""
    return [
        {"name": "L1", "param": ["0", "1", "t"], "defining": "x"},
        {"name": "L2", "param": ["t", "1", "-1"], "defining": "y*z+1"},
        {"name": "L3", "param": ["1", "0", "t"], "defining": "y"},
        {"name": "L4", "param": ["1", "t", "-1"], "defining": "x*z+1"},
        {"name": "L5", "param": ["t", "1-t", "0"], "defining": "z"},
    ]


def s_rational_point(x, y) -> tuple:
    """The point of S over chart coordinates ``(x, y)`` with ``x*y != 0``."""
    x, y = Fraction(x), Fraction(y)
    if x * y == 0:
        raise InputError("chart point must have x*y != 0")
    return (x, y, (1 - x - y) / (x * y))


# -- SL2 and affine space ------------------------------------------------------


def sl2_pair(ring: CoordinateRing | None = None) -> tuple[VectorField, VectorField]:
    ring = ring or sl2()
    d1 = VectorField.on(ring, {"b1": "a1", "b2": "a2"}, name="delta1")
    d2 = VectorField.on(ring, {"a1": "b1", "a2": "b2"}, name="delta2")
    return d1, d2


def partial(ring: CoordinateRing, var: str, f=1) -> VectorField:
    """``f * d/d(var)``."""
    return VectorField(ring, {var: f})


def c2_closure_generators(ring: CoordinateRing | None = None, degree: int = 3) -> list[VectorField]:
    """``{f d/dx1, x1 f d/dx1 : f in Q[x2]} and {g d/dx2, x2 g d/dx2 : g in Q[x1]}``
    with monomial ``f``, ``g`` and coefficient degree <= ``degree``."""
    ring = ring or affine_space(2)
    x1, x2 = ring.vars
    out = []
    for j in range(degree + 1):
        f = Polynomial.monomial((0, j), ring.vars)
        g = Polynomial.monomial((j, 0), ring.vars)
        out.append(partial(ring, x1, f))
        out.append(partial(ring, x2, g))
        if j + 1 <= degree:
            out.append(partial(ring, x1, Polynomial.var(x1, ring.vars) * f))
            out.append(partial(ring, x2, Polynomial.var(x2, ring.vars) * g))
    return out


def monomials_in(vars: Sequence[str], allowed: Sequence[str], max_degree: int) -> list[Polynomial]:
    """Monomials of degree <= max_degree in the ``allowed`` subset of ``vars``."""
    from .varieties import exponents_up_to

    idx = [vars.index(v) for v in allowed]
    out = []
    for e in exponents_up_to(len(idx), max_degree):
        full = [0] * len(vars)
        for i, k in zip(idx, e):
            full[i] = k
        out.append(Polynomial.monomial(full, vars))
    return out
