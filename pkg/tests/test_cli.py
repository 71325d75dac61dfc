import json
import subprocess
import sys

import pytest

from avf.cli import main


@pytest.fixture
def files(tmp_path):
    def w(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    return {
        "nu1": w("nu1.json", {"type": "field", "variety": "S", "coeffs": {"x": "1+x*z", "y": "-(1+y*z)"}}),
        "s2": w("s2.json", {"type": "field", "variety": "S", "coeffs": {"x": "x*y", "z": "-(1+y*z)"}}),
        "xnu1": w("xnu1.json", {"type": "field", "variety": "S", "coeffs": {"x": "x+x^2*z", "y": "-x*(1+y*z)"}}),
        "bad": w("bad.json", {"type": "field", "variety": "S", "coeffs": {"x": "x*y", "z": "-(1+x*z)"}}),
        "d1": w("d1.json", {"type": "field", "variety": "SL2", "coeffs": {"b1": "a1", "b2": "a2"}}),
        "d2": w("d2.json", {"type": "field", "variety": "SL2", "coeffs": {"a1": "b1", "a2": "b2"}}),
        "lin": w("lin.json", {"type": "field", "variety": "C1", "coeffs": {"x1": "x1"}}),
        "form": w("form.json", {"type": "form", "variety": "S", "chart_vars": ["x", "y"],
                                "substitutions": {"z": "(1-x-y)/(x*y)"}, "unit": "1/(x*y)"}),
        "pts": w("pts.json", {"type": "point-set", "variety": "S",
                              "points": [["1/2", "1/3", 1], [2, 3, "-2/3"], [-1, 2, 0]]}),
        "clash": w("clash.json", {"type": "point-set", "variety": "S",
                                  "points": [["1/2", "1/3", 1], [2, "-1/3", 1]]}),
        "tgt": w("tgt.json", {"type": "point", "variety": "S", "coords": ["13/25", "37/120", "515/481"]}),
    }


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_parse_and_json_output(capsys):
    code, out = run(capsys, "parse", "--format", "json", "x^2 - x^2")
    assert code == 0 and json.loads(out)["canonical"] == "0"


def test_global_flags_before_or_after_subcommand(capsys):
    a = run(capsys, "--format", "json", "nf", "x*y*z")
    b = run(capsys, "nf", "x*y*z", "--format", "json")
    assert a == b and json.loads(a[1])["normal_form"] == "-x - y + 1"


def test_bracket_and_apply(capsys, files):
    code, out = run(capsys, "bracket", files["nu1"], files["s2"])
    assert code == 0 and "tangent" in out
    code, out = run(capsys, "apply", files["nu1"], "z")
    assert code == 0 and out.strip() == "0"


def test_div_of_x_nu1(capsys, files):
    code, out = run(capsys, "div", files["xnu1"], "--form", files["form"], "--format", "json")
    assert json.loads(out)["divergence"] == "(-x + 1)/y"


def test_lnd_commands(capsys, files):
    assert run(capsys, "lnd-degree", files["d1"], "--a", "a1*b2")[0] == 0
    assert run(capsys, "lnd-certify", files["d2"])[0] == 0
    code, out = run(capsys, "lnd-degree", files["lin"], "--a", "x1", "--bound", "8")
    assert code == 2 and "inconclusive" in out


def test_flow_at_points(capsys, files):
    code, out = run(capsys, "flow", files["s2"], "--t", "1/2", "--at", files["pts"])
    assert code == 0 and "exp(" in out and out.count("image at") == 3


def test_verify_aut(capsys, files):
    assert run(capsys, "verify-aut", files["d1"], "--t", "3")[0] == 0
    assert run(capsys, "verify-aut", files["s2"], "--t", "1/3", "--form", files["form"])[0] == 0


def test_span_and_unit_cert(capsys, files):
    code, out = run(capsys, "span", files["nu1"], files["s2"], "--at", files["pts"])
    assert code == 0 and out.count("spans") == 3
    assert run(capsys, "unit-cert", "x1", "x1-1", "--variety", "C1")[0] == 0
    assert run(capsys, "unit-cert", "x1", "x2", "--max-degree", "2")[0] == 2


def test_compat(capsys, files):
    code, out = run(capsys, "compat", "--sigma", files["d1"], "--delta", files["d2"], "--witness", "a1*b2",
                    "--ker-sigma", "1,a1,a2", "--ker-delta", "1,b1,b2", "--max-degree", "1")
    assert code == 0 and "LND+LND" in out


def test_closure_exit_codes(capsys, files):
    code, out = run(capsys, "closure", "--max-degree", "3", "--depth", "3", "--targets", files["xnu1"])
    assert code == 1 and "not-in-span" in out
    assert run(capsys, "closure", "--targets", files["nu1"])[0] == 0


def test_transit(capsys, files):
    code, out = run(capsys, "transit", "--points", files["pts"], "--target", files["tgt"], "--tol", "1e-9",
                    "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["converged"] and data["fixed_points_exact"]


def test_transit_separation_violation_is_input_error(capsys, files):
    assert main(["transit", "--points", files["clash"], "--target", files["tgt"]]) == 3
    assert "separation" in capsys.readouterr().err


def test_input_errors(capsys, files):
    assert main(["nf", "w + 1"]) == 3
    assert main(["bracket", files["nu1"], "missing.json"]) == 3
    assert main(["bracket", files["bad"], files["nu1"]]) == 3


def test_verify_shipped_and_empty(capsys, tmp_path):
    code, out = run(capsys, "verify", "--jobs", "2")
    assert code == 0 and "0 mismatched" in out
    code, out = run(capsys, "verify", str(tmp_path))
    assert code == 0 and out.strip() == "0 items, 0 matched, 0 mismatched"


def test_verify_json_without_timing(capsys):
    code, out = run(capsys, "verify", "--filter", "acc5-*", "--format", "json", "--no-timing")
    data = json.loads(out)
    assert code == 0 and len(data["reports"]) == 5 and "seconds" not in data["reports"][0]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "avf", "parse", "(1-x-y)/(x*y)"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("(-x - y + 1)/(x*y)")
