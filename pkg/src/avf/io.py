"""JSON file formats for varieties, points, fields and volume forms.

A ``variety`` reference inside a point, field or form file may be the name of
a built-in variety (``S``, ``SL2``, ``C1`` .. ``C4``), a path to a variety
file (relative to the referring file), or an inline variety object.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .derivations import VectorField
from .errors import InputError
from .families import affine_space, sl2, surface_s
from .parsing import parse_polynomial
from .varieties import CoordinateRing, Point
from .volume import VolumeChart

_BUILTIN = {
    "S": surface_s,
    "SL2": sl2,
    **{f"C{n}": (lambda n=n: affine_space(n)) for n in range(1, 5)},
}
_cache: dict = {}


class FileFormatError(InputError):
    def __init__(self, message: str, path=None, line: int | None = None, column: int | None = None):
        where = str(path) if path else "<input>"
        if line is not None:
            where += f":{line}:{column}"
        super().__init__(f"{where}: {message}")
        self.path, self.line, self.column = path, line, column


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise FileFormatError(f"cannot read file ({e.strerror})", path) from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(e.msg, path, e.lineno, e.colno) from None
    if not isinstance(obj, dict):
        raise FileFormatError("top-level JSON value must be an object", path)
    obj.setdefault("_path", str(path))
    return obj


def _expect(obj: dict, kind: str):
    t = obj.get("type")
    if t != kind:
        raise FileFormatError(f"expected type {kind!r}, found {t!r}", obj.get("_path"))


def _field(obj: dict, key: str):
    if key not in obj:
        raise FileFormatError(f"missing key {key!r}", obj.get("_path"))
    return obj[key]


def parse_rational_number(s) -> Fraction:
    if isinstance(s, bool):
        raise InputError(f"not a number: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise InputError(f"not an exact rational: {s!r} (use integers or 'p/q' strings)")


def builtin_variety(name: str) -> CoordinateRing:
    if name not in _cache:
        _cache[name] = _BUILTIN[name]()
    return _cache[name]


def variety_from_json(obj: dict) -> CoordinateRing:
    _expect(obj, "variety")
    vars = _field(obj, "vars")
    if not isinstance(vars, list) or not all(isinstance(v, str) for v in vars):
        raise FileFormatError("'vars' must be a list of names", obj.get("_path"))
    rels = obj.get("relations", [])
    try:
        polys = [parse_polynomial(r, vars) for r in rels]
    except InputError as e:
        raise FileFormatError(str(e), obj.get("_path")) from None
    return CoordinateRing(vars, polys, name=obj.get("name"))


def resolve_variety(ref, base: Path | None = None) -> CoordinateRing:
    if isinstance(ref, CoordinateRing):
        return ref
    if isinstance(ref, dict):
        return variety_from_json(ref)
    if not isinstance(ref, str):
        raise InputError(f"bad variety reference {ref!r}")
    if ref in _BUILTIN:
        return builtin_variety(ref)
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    if path.exists():
        return variety_from_json(load_json(path))
    raise InputError(f"unknown variety {ref!r}: not a built-in name ({', '.join(_BUILTIN)}) or a file")


def _ring_of(obj: dict, ring: CoordinateRing | None) -> CoordinateRing:
    if ring is not None:
        return ring
    base = Path(obj["_path"]).parent if "_path" in obj else None
    return resolve_variety(_field(obj, "variety"), base)


def point_from_json(obj: dict, ring: CoordinateRing | None = None) -> Point:
    _expect(obj, "point")
    ring = _ring_of(obj, ring)
    coords = [parse_rational_number(c) for c in _field(obj, "coords")]
    return Point.on(ring, coords)


def points_from_json(obj: dict, ring: CoordinateRing | None = None) -> list[Point]:
    """A ``point-set`` file, or a single ``point`` file."""
    if obj.get("type") == "point":
        return [point_from_json(obj, ring)]
    _expect(obj, "point-set")
    ring = _ring_of(obj, ring)
    return [Point.on(ring, [parse_rational_number(c) for c in p]) for p in _field(obj, "points")]


def field_from_json(obj: dict, ring: CoordinateRing | None = None) -> VectorField:
    _expect(obj, "field")
    ring = _ring_of(obj, ring)
    coeffs = _field(obj, "coeffs")
    if isinstance(coeffs, dict):
        unknown = set(coeffs) - set(ring.vars)
        if unknown:
            raise FileFormatError(f"coefficients for unknown variables {sorted(unknown)}", obj.get("_path"))
        coeffs = {v: parse_polynomial(c, ring.vars) for v, c in coeffs.items()}
    else:
        coeffs = [parse_polynomial(c, ring.vars) for c in coeffs]
    return VectorField(ring, coeffs, name=obj.get("name"))


def form_from_json(obj: dict, ring: CoordinateRing | None = None) -> VolumeChart:
    _expect(obj, "form")
    ring = _ring_of(obj, ring)
    return VolumeChart(ring, _field(obj, "chart_vars"), obj.get("substitutions", {}),
                       obj.get("unit", "1"), obj.get("domain_note", ""), obj.get("name"))


def automorphism_from_json(obj: dict, ring: CoordinateRing | None = None):
    """``{"type": "automorphism", "variety": ..., "images": [...], "inverse": [...]}``."""
    from .integrability import PolyAutomorphism

    _expect(obj, "automorphism")
    ring = _ring_of(obj, ring)
    images = [parse_polynomial(e, ring.vars) for e in _field(obj, "images")]
    inverse = [parse_polynomial(e, ring.vars) for e in _field(obj, "inverse")]
    return PolyAutomorphism(ring, tuple(images), tuple(inverse))


def stages_from_json(obj: dict, ring: CoordinateRing | None = None) -> list:
    """``{"type": "stages", "variety": ..., "stages": [{"coeffs": {...}, "integral": "z"}, ...]}``."""
    _expect(obj, "stages")
    ring = _ring_of(obj, ring)
    out = []
    for st in _field(obj, "stages"):
        v = VectorField(ring, {k: parse_polynomial(c, ring.vars) for k, c in st["coeffs"].items()})
        out.append((v, ring.normal_form(st["integral"])))
    return out


def load(path, kind: str | None = None, ring: CoordinateRing | None = None) -> Any:
    """Load any supported file, optionally insisting on its type."""
    obj = load_json(path)
    t = obj.get("type")
    if kind is not None and t != kind and not (kind == "point-set" and t == "point"):
        raise FileFormatError(f"expected a {kind} file, found {t!r}", path)
    try:
        if t == "variety":
            return variety_from_json(obj)
        if t == "point":
            return point_from_json(obj, ring)
        if t == "point-set":
            return points_from_json(obj, ring)
        if t == "field":
            return field_from_json(obj, ring)
        if t == "form":
            return form_from_json(obj, ring)
        if t == "automorphism":
            return automorphism_from_json(obj, ring)
        if t == "stages":
            return stages_from_json(obj, ring)
    except FileFormatError:
        raise
    except InputError as e:
        raise FileFormatError(str(e), path) from None
    raise FileFormatError(f"unknown file type {t!r}", path)


# -- writers -------------------------------------------------------------------


def _q(x) -> str:
    return str(Fraction(x)) if isinstance(x, (int, Fraction)) else str(x)


def variety_to_json(ring: CoordinateRing) -> dict:
    return {"type": "variety", "name": ring.name, "vars": list(ring.vars),
            "relations": [str(g) for g in ring.relations]}


def point_to_json(point, variety: str) -> dict:
    coords = point.coords if isinstance(point, Point) else point
    return {"type": "point", "variety": variety, "coords": [_q(c) for c in coords]}


def field_to_json(v: VectorField, variety: str) -> dict:
    out = {"type": "field", "variety": variety, "coeffs": v.coeff_dict()}
    if v.name:
        out["name"] = v.name
    return out


def form_to_json(c: VolumeChart, variety: str) -> dict:
    return {"type": "form", "variety": variety, "chart_vars": list(c.chart_vars),
            "substitutions": {k: str(r) for k, r in c.substitutions.items()},
            "unit": str(c.unit), "domain_note": c.domain_note}
