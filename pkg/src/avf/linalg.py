"""Exact sparse linear algebra over QQ.

Vectors are dicts ``{index: Fraction}`` with no zero entries.  The central
object is :class:`IncrementalSpan`, a reduced row-echelon basis that also
remembers how each basis vector was assembled from the inserted vectors, so
membership queries return exact coordinates.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Sequence


def _key(k):
    # mixed index types sort by (type name, value)
    return (type(k).__name__, k)


class IncrementalSpan:
    """Linear span of labelled vectors, maintained in reduced echelon form."""

    def __init__(self):
        self._pivots: dict = {}  # pivot index -> (vec, combo)
        self.labels: list = []

    def __len__(self) -> int:
        return len(self._pivots)

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def _reduce(self, vec: dict) -> tuple[dict, dict]:
        v = dict(vec)
        combo: dict = {}
        for p in [p for p in v if p in self._pivots]:
            c = v.get(p)
            if not c:
                continue
            bvec, bcombo = self._pivots[p]
            for k, x in bvec.items():
                s = v.get(k, 0) - c * x
                if s:
                    v[k] = s
                else:
                    v.pop(k, None)
            for lab, x in bcombo.items():
                s = combo.get(lab, 0) - c * x
                if s:
                    combo[lab] = s
                else:
                    combo.pop(lab, None)
        return v, combo

    def add(self, vec: dict, label: Hashable) -> bool:
        """Insert ``vec``; True if it enlarged the span."""
        v, combo = self._reduce({k: Fraction(x) for k, x in vec.items() if x})
        if not v:
            return False
        combo[label] = combo.get(label, 0) + 1
        p = min(v, key=_key)
        inv = 1 / v[p]
        v = {k: x * inv for k, x in v.items()}
        combo = {k: x * inv for k, x in combo.items()}
        for q, (bvec, bcombo) in self._pivots.items():
            c = bvec.get(p)
            if c:
                for k, x in v.items():
                    s = bvec.get(k, 0) - c * x
                    if s:
                        bvec[k] = s
                    else:
                        bvec.pop(k, None)
                for lab, x in combo.items():
                    s = bcombo.get(lab, 0) - c * x
                    if s:
                        bcombo[lab] = s
                    else:
                        bcombo.pop(lab, None)
        self._pivots[p] = (v, combo)
        self.labels.append(label)
        return True

    def contains(self, vec: dict) -> bool:
        v, _ = self._reduce({k: Fraction(x) for k, x in vec.items() if x})
        return not v

    def express(self, vec: dict) -> dict | None:
        """Coordinates ``{label: coeff}`` with ``sum coeff*vec_label == vec``, or None."""
        v, combo = self._reduce({k: Fraction(x) for k, x in vec.items() if x})
        if v:
            return None
        return {lab: -x for lab, x in combo.items() if x}


def rank(rows: Iterable[Sequence]) -> int:
    span = IncrementalSpan()
    for i, row in enumerate(rows):
        span.add({j: Fraction(x) for j, x in enumerate(row) if x}, i)
    return span.rank


def mat_vec(matrix: Sequence[Sequence], vec: Sequence) -> list:
    return [sum((a * b for a, b in zip(row, vec)), Fraction(0)) for row in matrix]


def det(matrix: Sequence[Sequence]):
    """Determinant for any ring-like entries (polynomials, rational functions, floats).

    Small matrices use the permutation expansion so that no division is
    needed; larger ones fall back to Gaussian elimination.
    """
    m = [list(r) for r in matrix]
    n = len(m)
    if n == 0:
        return 1
    if n <= 4:
        from itertools import permutations

        total = None
        for perm in permutations(range(n)):
            inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
            term = m[0][perm[0]]
            for i in range(1, n):
                term = term * m[i][perm[i]]
            if inversions % 2:
                term = -term
            total = term if total is None else total + term
        return total
    sign = 1
    result = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return 0 * result
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        result = result * m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f != 0:
                for k in range(c, n):
                    m[r][k] = m[r][k] - f * m[c][k]
    return result * sign
