"""Exact sparse multivariate polynomials and rational functions over QQ.

Coefficients are :class:`fractions.Fraction`.  A polynomial carries its
ordered variable list; terms are kept in a dict keyed by exponent tuples and
are iterated in graded lexicographic order (the first declared variable is
the largest).

>>> x, y = variables("x", "y")
>>> print((x + y) * (x - y))
x^2 - y^2
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Callable, Iterable, Mapping, Sequence

from .errors import InputError, VarlistMismatch

Exponents = tuple
Scalar = (int, Fraction)


def grlex_key(exps: tuple) -> tuple:
    return (sum(exps), exps)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, _RationalABC)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


def _fmt_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class Polynomial:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("vars", "_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, object] | None = None, vars: Sequence[str] = ()):
        self.vars = tuple(vars)
        n = len(self.vars)
        clean = {}
        if terms:
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != n:
                    raise InputError(f"exponent vector {exps} does not match {n} variables")
                c = _as_fraction(c)
                if c:
                    clean[exps] = clean.get(exps, 0) + c
                    if not clean[exps]:
                        del clean[exps]
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict, vars: tuple) -> "Polynomial":
        # trusted constructor: terms already clean
        p = cls.__new__(cls)
        p.vars = vars
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, vars: Sequence[str]) -> "Polynomial":
        return cls._raw({}, tuple(vars))

    @classmethod
    def constant(cls, c, vars: Sequence[str]) -> "Polynomial":
        vars = tuple(vars)
        c = _as_fraction(c)
        return cls._raw({(0,) * len(vars): c} if c else {}, vars)

    @classmethod
    def var(cls, name: str, vars: Sequence[str]) -> "Polynomial":
        vars = tuple(vars)
        if name not in vars:
            raise InputError(f"unknown variable {name!r}")
        i = vars.index(name)
        exps = tuple(1 if j == i else 0 for j in range(len(vars)))
        return cls._raw({exps: Fraction(1)}, vars)

    @classmethod
    def monomial(cls, exps: Sequence[int], vars: Sequence[str], coeff=1) -> "Polynomial":
        return cls({tuple(exps): coeff}, vars)

    # -- inspection -------------------------------------------------------

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def terms(self) -> list[tuple[tuple, Fraction]]:
        """Terms as ``(exponents, coefficient)`` in descending grlex order."""
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def term_dict(self) -> dict:
        return dict(self._terms)

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def monomials(self) -> list[tuple]:
        return [e for e, _ in self.terms()]

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and not any(next(iter(self._terms))))

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise InputError(f"{self} is not constant")
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self._terms), default=-1)

    def used_vars(self) -> set[str]:
        used = set()
        for e in self._terms:
            for v, k in zip(self.vars, e):
                if k:
                    used.add(v)
        return used

    def leading(self) -> tuple[tuple, Fraction]:
        if not self._terms:
            raise InputError("zero polynomial has no leading term")
        e = max(self._terms, key=grlex_key)
        return e, self._terms[e]

    def leading_coefficient(self) -> Fraction:
        return self.leading()[1]

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.vars != self.vars:
                raise VarlistMismatch(f"variable lists differ: {self.vars} vs {other.vars}")
            return other
        if isinstance(other, Scalar) or isinstance(other, _RationalABC):
            return Polynomial.constant(other, self.vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if len(other._terms) > len(self._terms):
            a, b = other._terms, self._terms
        else:
            a, b = self._terms, other._terms
        out = dict(a)
        for e, c in b.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s += c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Polynomial._raw(out, self.vars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({e: -c for e, c in self._terms.items()}, self.vars)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e)
            if s is None:
                out[e] = -c
            else:
                s -= c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Polynomial._raw(out, self.vars)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Scalar) or (isinstance(other, _RationalABC) and not isinstance(other, Polynomial)):
            c = _as_fraction(other)
            if not c:
                return Polynomial.zero(self.vars)
            return Polynomial._raw({e: v * c for e, v in self._terms.items()}, self.vars)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict = {}
        n = self.nvars
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(e1[i] + e2[i] for i in range(n))
                s = out.get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return Polynomial._raw({e: c for e, c in out.items() if c}, self.vars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            return RationalFunction(self, other)
        c = _as_fraction(other)
        if not c:
            raise ZeroDivisionError("division of a polynomial by zero")
        return self * (1 / c)

    def __rtruediv__(self, other):
        return RationalFunction(Polynomial.constant(other, self.vars), self)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise InputError("polynomial exponent must be a nonnegative integer")
        result = Polynomial.constant(1, self.vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self._terms == other._terms
        if isinstance(other, Scalar) or isinstance(other, _RationalABC):
            return self.is_constant() and self.constant_value() == other
        if isinstance(other, RationalFunction):
            return other == self
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self._terms.items())))
        return self._hash

    # -- calculus and substitution ---------------------------------------

    def diff(self, name: str) -> "Polynomial":
        i = self.vars.index(name) if isinstance(name, str) else name
        out = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Polynomial._raw(out, self.vars)

    def evaluate(self, values: Sequence | Mapping, coerce: Callable | None = None):
        """Evaluate at a point; ``coerce`` converts Fraction coefficients."""
        if isinstance(values, Mapping):
            values = [values[v] for v in self.vars]
        values = list(values)
        if len(values) != self.nvars:
            raise InputError(f"expected {self.nvars} values, got {len(values)}")
        total = coerce(Fraction(0)) if coerce else Fraction(0)
        powers: dict = {}
        for e, c in self._terms.items():
            term = coerce(c) if coerce else c
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in powers:
                        powers[key] = values[i] ** k
                    term = term * powers[key]
            total = total + term
        return total

    __call__ = evaluate

    def in_vars(self, vars: Sequence[str]) -> "Polynomial":
        """Re-express over another variable list containing every used variable."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        idx = []
        for v in self.vars:
            idx.append(vars.index(v) if v in vars else None)
        out = {}
        for e, c in self._terms.items():
            ne = [0] * len(vars)
            for i, k in enumerate(e):
                if k:
                    if idx[i] is None:
                        raise VarlistMismatch(f"variable {self.vars[i]!r} not in {vars}")
                    ne[idx[i]] = k
            out[tuple(ne)] = c
        return Polynomial._raw(out, vars)

    def compose(self, images: Mapping[str, "Polynomial"], vars: Sequence[str] | None = None) -> "Polynomial":
        """Substitute polynomials for variables (unmapped variables stay put)."""
        if vars is None:
            vars = next(iter(images.values())).vars if images else self.vars
        vars = tuple(vars)
        ims = []
        for v in self.vars:
            if v in images:
                im = images[v]
                if not isinstance(im, Polynomial):
                    im = Polynomial.constant(im, vars)
                ims.append(im.in_vars(vars))
            else:
                ims.append(Polynomial.var(v, vars))
        powers: dict = {}
        total = Polynomial.zero(vars)
        for e, c in self._terms.items():
            term = Polynomial.constant(c, vars)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in powers:
                        powers[(i, k)] = ims[i] ** k
                    term = term * powers[(i, k)]
            total = total + term
        return total

    def divide(self, divisors: Sequence["Polynomial"]) -> tuple[list["Polynomial"], "Polynomial"]:
        """Multivariate division in grlex order: returns (quotients, remainder)."""
        n = self.nvars
        leads = []
        for g in divisors:
            if g.vars != self.vars:
                raise VarlistMismatch("divisor has a different variable list")
            leads.append(g.leading())
        quots = [dict() for _ in divisors]
        rem: dict = {}
        work = dict(self._terms)
        while work:
            e = max(work, key=grlex_key)
            c = work[e]
            for j, (le, lc) in enumerate(leads):
                if all(e[i] >= le[i] for i in range(n)):
                    shift = tuple(e[i] - le[i] for i in range(n))
                    f = c / lc
                    quots[j][shift] = quots[j].get(shift, 0) + f
                    for ge, gc in divisors[j]._terms.items():
                        te = tuple(ge[i] + shift[i] for i in range(n))
                        s = work.get(te, 0) - f * gc
                        if s:
                            work[te] = s
                        else:
                            work.pop(te, None)
                    break
            else:
                rem[e] = c
                del work[e]
        return ([Polynomial(q, self.vars) for q in quots], Polynomial._raw(rem, self.vars))

    def exact_quotient(self, divisor: "Polynomial") -> "Polynomial | None":
        """``self / divisor`` if it divides exactly, else None."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        (q,), r = self.divide([divisor])
        return q if r.is_zero() else None

    def content_monomial(self) -> tuple:
        """Componentwise minimum exponent over all terms."""
        if not self._terms:
            return (0,) * self.nvars
        it = iter(self._terms)
        m = list(next(it))
        for e in it:
            for i, k in enumerate(e):
                if k < m[i]:
                    m[i] = k
        return tuple(m)

    def shift_down(self, exps: Sequence[int]) -> "Polynomial":
        """Divide by the monomial with the given exponents (must divide every term)."""
        out = {}
        for e, c in self._terms.items():
            ne = tuple(a - b for a, b in zip(e, exps))
            if min(ne, default=0) < 0:
                raise InputError("monomial does not divide polynomial")
            out[ne] = c
        return Polynomial._raw(out, self.vars)

    # -- printing ---------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            if not mono:
                s = _fmt_coeff(c)
            elif c == 1:
                s = mono
            elif c == -1:
                s = "-" + mono
            else:
                s = f"{_fmt_coeff(c)}*{mono}"
            parts.append(s)
        out = parts[0]
        for s in parts[1:]:
            out += " - " + s[1:] if s.startswith("-") else " + " + s
        return out

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r}, vars={self.vars})"


def variables(*names: str) -> tuple[Polynomial, ...]:
    """Generator polynomials over the variable list ``names``."""
    if len(names) == 1 and not isinstance(names[0], str):
        names = tuple(names[0])
    return tuple(Polynomial.var(n, names) for n in names)


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if a.vars != b.vars:
        raise VarlistMismatch(f"variable lists differ: {a.vars} vs {b.vars}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise InputError(f"unknown operation {op!r}")


class RationalFunction:
    """Quotient of two polynomials over one variable list.

    Normalisation cancels the common monomial content, detects exact division
    in either direction and makes the leading coefficient of the denominator 1.
    No multivariate gcd is attempted, so equality is decided by
    cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if isinstance(num, RationalFunction):
            if den is not None:
                raise InputError("cannot combine a rational function with a separate denominator")
            self.num, self.den = num.num, num.den
            return
        if not isinstance(num, Polynomial):
            if isinstance(den, Polynomial):
                num = Polynomial.constant(num, den.vars)
            else:
                raise InputError("rational function needs a polynomial numerator")
        if den is None:
            den = Polynomial.constant(1, num.vars)
        elif not isinstance(den, Polynomial):
            den = Polynomial.constant(den, num.vars)
        if den.vars != num.vars:
            raise VarlistMismatch(f"variable lists differ: {num.vars} vs {den.vars}")
        if den.is_zero():
            raise InputError("denominator is identically zero")
        self.num, self.den = _normalize_pair(num, den)

    @classmethod
    def _raw(cls, num: Polynomial, den: Polynomial) -> "RationalFunction":
        r = cls.__new__(cls)
        r.num, r.den = num, den
        return r

    @property
    def vars(self) -> tuple:
        return self.num.vars

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        if not self.den.is_constant():
            raise InputError(f"{self} is not a polynomial")
        return self.num * (1 / self.den.constant_value())

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            if other.vars != self.vars:
                raise VarlistMismatch(f"variable lists differ: {self.vars} vs {other.vars}")
            return other
        if isinstance(other, Polynomial):
            if other.vars != self.vars:
                raise VarlistMismatch(f"variable lists differ: {self.vars} vs {other.vars}")
            return RationalFunction._raw(other, Polynomial.constant(1, self.vars))
        if isinstance(other, Scalar) or isinstance(other, _RationalABC):
            return RationalFunction._raw(
                Polynomial.constant(other, self.vars), Polynomial.constant(1, self.vars)
            )
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._raw(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction(self.den ** (-k), self.num ** (-k))
        return RationalFunction(self.num ** k, self.den ** k)

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, RationalFunction) else other
        if o is NotImplemented:
            return NotImplemented
        if o.vars != self.vars:
            return False
        return self.num * o.den == o.num * self.den

    __hash__ = None

    def diff(self, name: str) -> "RationalFunction":
        if self.den.is_constant():
            return RationalFunction(self.num.diff(name), self.den)
        return RationalFunction(
            self.num.diff(name) * self.den - self.num * self.den.diff(name), self.den * self.den
        )

    def evaluate(self, values, coerce=None):
        d = self.den.evaluate(values, coerce)
        if d == 0:
            raise ZeroDivisionError(f"denominator {self.den} vanishes at the point")
        return self.num.evaluate(values, coerce) / d

    __call__ = evaluate

    def in_vars(self, vars) -> "RationalFunction":
        return RationalFunction._raw(self.num.in_vars(vars), self.den.in_vars(vars))

    def __str__(self) -> str:
        if self.den == 1:
            return str(self.num)
        n = str(self.num)
        if len(self.num) > 1:
            n = f"({n})"
        d = str(self.den)
        if not d.isidentifier():
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self) -> str:
        return f"RationalFunction({str(self)!r}, vars={self.vars})"


def _normalize_pair(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    vars = num.vars
    if num.is_zero():
        return Polynomial.zero(vars), Polynomial.constant(1, vars)
    m_num, m_den = num.content_monomial(), den.content_monomial()
    common = tuple(min(a, b) for a, b in zip(m_num, m_den))
    if any(common):
        num, den = num.shift_down(common), den.shift_down(common)
    if not den.is_constant():
        q = num.exact_quotient(den)
        if q is not None:
            num, den = q, Polynomial.constant(1, vars)
        elif not num.is_constant():
            q = den.exact_quotient(num)
            if q is not None:
                num, den = Polynomial.constant(1, vars), q
    lc = den.leading_coefficient()
    if lc != 1:
        num, den = num * (1 / lc), den * (1 / lc)
    return num, den


def rf_normalize(r: RationalFunction) -> RationalFunction:
    return RationalFunction(r.num, r.den)


def as_rational_function(e, vars: Sequence[str] | None = None) -> RationalFunction:
    if isinstance(e, RationalFunction):
        return e
    if isinstance(e, Polynomial):
        return RationalFunction._raw(e, Polynomial.constant(1, e.vars))
    if vars is None:
        raise InputError("constant needs a variable list")
    return RationalFunction._raw(Polynomial.constant(e, vars), Polynomial.constant(1, vars))


def poly_substitute(p: Polynomial, mapping: Mapping[str, object]) -> RationalFunction:
    """Substitute rational functions for variables of ``p``.

    Images must live over ``p``'s variable list; unmapped variables stay
    fixed.  The result is put over the common denominator
    ``prod(den_v ** maxdeg_v)`` before normalisation.
    """
    vars = p.vars
    images = {}
    for v, im in mapping.items():
        if v not in vars:
            raise InputError(f"substitution for unknown variable {v!r}")
        im = as_rational_function(im, vars)
        if im.vars != vars:
            im = im.in_vars(vars)
        images[v] = im
    if not images:
        return as_rational_function(p)
    idx = {vars.index(v): im for v, im in images.items()}
    maxdeg = {i: p.degree_in(vars[i]) for i in idx}
    den = Polynomial.constant(1, vars)
    for i, k in maxdeg.items():
        if k > 0:
            den = den * idx[i].den ** k
    num_pows: dict = {}
    den_pows: dict = {}

    def npow(i, k):
        if (i, k) not in num_pows:
            num_pows[(i, k)] = idx[i].num ** k
        return num_pows[(i, k)]

    def dpow(i, k):
        if (i, k) not in den_pows:
            den_pows[(i, k)] = idx[i].den ** k
        return den_pows[(i, k)]

    total = Polynomial.zero(vars)
    n = len(vars)
    for e, c in p.term_dict().items():
        fixed = tuple(0 if i in idx else e[i] for i in range(n))
        term = Polynomial({fixed: c}, vars)
        for i in idx:
            k = e[i]
            if k:
                term = term * npow(i, k)
            rest = maxdeg[i] - k
            if rest > 0:
                term = term * dpow(i, rest)
        total = total + term
    return RationalFunction(total, den)
