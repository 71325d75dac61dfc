from fractions import Fraction

import pytest
import sympy
from hypothesis import settings, strategies as st

from avf.algebra import Polynomial, RationalFunction

settings.register_profile("suite", max_examples=40, deadline=None)
settings.load_profile("suite")

VARS3 = ("x", "y", "z")


def to_sympy(e):
    """Independent sympy image of a Polynomial, RationalFunction or ring element."""
    if hasattr(e, "rep"):
        e = e.rep
    if isinstance(e, RationalFunction):
        return sympy.cancel(to_sympy(e.num) / to_sympy(e.den))
    syms = sympy.symbols(e.vars) if e.vars else ()
    total = sympy.Integer(0)
    for exps, c in e.terms():
        m = sympy.Rational(c.numerator, c.denominator)
        for s, k in zip(syms, exps):
            m *= s ** k
        total += m
    return sympy.expand(total)


def sym_equal(a, b) -> bool:
    return sympy.simplify(sympy.sympify(a) - sympy.sympify(b)) == 0


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polynomials(draw, vars=VARS3, max_degree=3, max_terms=5):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        exps = tuple(draw(st.integers(0, max_degree)) for _ in vars)
        if sum(exps) > max_degree:
            continue
        terms[exps] = draw(rationals)
    return Polynomial(terms, vars)


@pytest.fixture(scope="session")
def S():
    from avf.io import builtin_variety

    return builtin_variety("S")


@pytest.fixture(scope="session")
def SL2():
    from avf.io import builtin_variety

    return builtin_variety("SL2")


@pytest.fixture(scope="session")
def torus(S):
    from avf.families import torus_chart

    return torus_chart(S)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
