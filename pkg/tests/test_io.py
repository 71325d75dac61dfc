import json

import pytest

from avf import io
from avf.errors import InputError
from avf.families import nu1, torus_chart
from avf.io import FileFormatError


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return p


def test_builtin_varieties():
    assert io.builtin_variety("S").vars == ("x", "y", "z")
    assert io.builtin_variety("C3").relations == ()
    with pytest.raises(InputError, match="unknown variety"):
        io.resolve_variety("Q7")


def test_variety_file_reference_is_relative(tmp_path):
    _write(tmp_path, "v.json", {"type": "variety", "name": "H", "vars": ["u", "v"], "relations": ["u*v-1"]})
    p = _write(tmp_path, "pt.json", {"type": "point", "variety": "v.json", "coords": ["1/2", 2]})
    pt = io.load(p)
    assert pt.coords == (io.parse_rational_number("1/2"), 2)


def test_field_round_trip(tmp_path, S):
    v = nu1(S)
    p = _write(tmp_path, "f.json", io.field_to_json(v, "S"))
    assert io.load(p, "field") == v


def test_form_round_trip(tmp_path, S):
    c = torus_chart(S)
    p = _write(tmp_path, "c.json", io.form_to_json(c, "S"))
    back = io.load(p, "form")
    assert back.unit == c.unit and back.substitutions == c.substitutions


def test_variety_round_trip(tmp_path, S):
    p = _write(tmp_path, "s.json", io.variety_to_json(S))
    assert io.load(p) == S


def test_point_off_variety_rejected(tmp_path):
    p = _write(tmp_path, "p.json", {"type": "point", "variety": "S", "coords": [1, 1, 1]})
    with pytest.raises(InputError, match="not on the variety"):
        io.load(p)


def test_floats_rejected(tmp_path):
    p = _write(tmp_path, "p.json", {"type": "point", "variety": "S", "coords": [0.5, 1, 0]})
    with pytest.raises(InputError, match="exact rational"):
        io.load(p)


def test_json_syntax_error_has_position(tmp_path):
    p = _write(tmp_path, "bad.json", '{"type": "field",\n  "coeffs": }')
    with pytest.raises(FileFormatError) as e:
        io.load(p)
    assert e.value.line == 2 and e.value.column is not None


def test_wrong_type_rejected(tmp_path):
    p = _write(tmp_path, "f.json", {"type": "point", "variety": "S", "coords": [0, 1, 0]})
    with pytest.raises(FileFormatError, match="expected a field"):
        io.load(p, "field")


def test_unknown_coefficient_variable(tmp_path):
    p = _write(tmp_path, "f.json", {"type": "field", "variety": "S", "coeffs": {"w": "1"}})
    with pytest.raises(InputError):
        io.load(p)


def test_automorphism_and_stages(tmp_path):
    a = _write(tmp_path, "a.json", {"type": "automorphism", "variety": "C2", "images": ["x1 + x2^2", "x2"],
                                    "inverse": ["x1 - x2^2", "x2"]})
    phi = io.load(a)
    assert phi.apply((1, 2)) == (5, 2)
    s = _write(tmp_path, "s.json", {"type": "stages", "variety": "S",
                                    "stages": [{"coeffs": {"x": "1+x*z", "y": "-(1+y*z)"}, "integral": "z"}]})
    [(field, f)] = io.load(s)
    assert field.apply(f).is_zero()


def test_point_set_accepts_single_point(tmp_path):
    p = _write(tmp_path, "p.json", {"type": "point", "variety": "S", "coords": [0, 1, 0]})
    assert len(io.points_from_json(io.load_json(p))) == 1
