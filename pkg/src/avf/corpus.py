"""Corpus items, the corpus runner and line verification.

A corpus item is one JSON file; its id is the file stem::

    {"kind": "check", "expectation": "pass",
     "payload": {"check": "closure-s", "params": {"max_degree": 3, "depth": 3}}}

Kinds ``variety``, ``field``, ``form`` and ``point-set`` carry a file-format
object as payload and are checked for well-formedness (fields for tangency,
point sets for lying on the variety).  Kind ``check`` runs a named check.
An optional ``assumptions`` list names hypotheses the item relies on but does
not certify; it is copied into the report.
"""

from __future__ import annotations

import fnmatch
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .algebra import Polynomial
from .checks import Outcome, num, run_check
from .derivations import tangency_check
from .errors import InputError
from .io import FileFormatError, field_from_json, form_from_json, load_json, points_from_json, variety_from_json
from .parsing import parse_polynomial
from .varieties import CoordinateRing

KINDS = ("variety", "field", "form", "point-set", "check")
EXPECTATIONS = ("pass", "fail-with-witness", "inconclusive")
VERDICT_FOR = {"pass": "pass", "fail-with-witness": "fail", "inconclusive": "inconclusive"}


def shipped_corpus_dir() -> Path:
    return Path(str(resources.files("avf") / "corpus"))


# -- lines ---------------------------------------------------------------------


@dataclass
class LineReport:
    ok: bool
    relation_residual: list
    defining_residual: str


def verify_line(param: Sequence, ring: CoordinateRing, defining, tvar: str = "t") -> LineReport:
    """Check that ``t -> param(t)`` lies on the variety and in the zero set of ``defining``."""
    tv = (tvar,)
    comps = [parse_polynomial(p, tv) if isinstance(p, str) else p.in_vars(tv) for p in param]
    if len(comps) != len(ring.vars):
        raise InputError("parametrization needs one polynomial per coordinate")
    images = dict(zip(ring.vars, comps))
    rel = [g.compose(images, tv) for g in ring.relations]
    d = ring.poly(defining).compose(images, tv)
    return LineReport(all(r.is_zero() for r in rel) and d.is_zero(), [str(r) for r in rel], str(d))


# -- items and reports ---------------------------------------------------------


@dataclass
class Report:
    id: str
    kind: str
    expectation: str
    verdict: str  # pass, fail, inconclusive, error
    match: bool
    mismatch: str | None  # None, "hard", "inconclusive", "input"
    witnesses: dict = field(default_factory=dict)
    tolerance: str = "exact"
    seconds: float = 0.0

    def to_json(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("seconds")
        return d


def _classify(expectation: str, verdict: str) -> tuple[bool, str | None]:
    if verdict == "error":
        return False, "input"
    want = VERDICT_FOR[expectation]
    if want == verdict:
        return True, None
    if "inconclusive" in (want, verdict) and "pass" in (want, verdict):
        return False, "inconclusive"
    return False, "hard"


def _run_kind(kind: str, payload: dict, path: Path) -> Outcome:
    payload = dict(payload)
    payload.setdefault("_path", str(path))
    if kind == "check":
        if "check" not in payload:
            raise FileFormatError("check payload needs a 'check' name", path)
        return run_check(payload["check"], payload.get("params", {}))
    if kind == "variety":
        ring = variety_from_json(payload)
        w = {"groebner": [str(g) for g in ring.groebner]}
        expected = payload.get("expected_groebner")
        ok = expected is None or [parse_polynomial(e, ring.vars) for e in expected] == list(ring.groebner)
        return Outcome("pass" if ok else "fail", w)
    if kind == "field":
        v = field_from_json(payload)
        res = tangency_check(v)
        w = {"field": str(v)}
        if res.ok:
            w["cofactors"] = [[str(h) for h in row] for row in res.cofactors]
        else:
            w["ambient_values"] = [str(x) for x in res.values]
            w["residuals"] = [str(r) for r in res.residuals]
        return Outcome("pass" if res.ok else "fail", w)
    if kind == "form":
        c = form_from_json(payload)
        return Outcome("pass", {"chart": repr(c), "domain": c.domain_note})
    if kind == "point-set":
        pts = points_from_json(payload)
        return Outcome("pass", {"points": [[num(x) for x in p.coords] for p in pts]})
    raise FileFormatError(f"unknown kind {kind!r}", path)


def _witness_matches(expected: dict, witnesses: dict) -> list[str]:
    """Keys of ``expected_witness`` whose value differs from the report."""
    bad = []
    for k, v in expected.items():
        if witnesses.get(k) != v:
            bad.append(k)
    return bad


def run_item(path) -> Report:
    path = Path(path)
    item_id = path.stem
    t0 = time.perf_counter()
    kind, expectation = "?", "pass"
    try:
        obj = load_json(path)
        kind = obj.get("kind")
        expectation = obj.get("expectation", "pass")
        if kind not in KINDS:
            raise FileFormatError(f"kind must be one of {KINDS}, found {kind!r}", path)
        if expectation not in EXPECTATIONS:
            raise FileFormatError(f"expectation must be one of {EXPECTATIONS}", path)
        payload = obj.get("payload")
        if not isinstance(payload, dict):
            raise FileFormatError("missing object 'payload'", path)
        out = _run_kind(kind, payload, path)
        if obj.get("assumptions"):
            out.witnesses["assumptions"] = list(obj["assumptions"])
        match, mismatch = _classify(expectation, out.verdict)
        exp_w = obj.get("expected_witness")
        if match and exp_w:
            bad = _witness_matches(exp_w, out.witnesses)
            if bad:
                match, mismatch = False, "hard"
                out.witnesses["witness_mismatch"] = bad
        return Report(item_id, kind, expectation, out.verdict, match, mismatch, out.witnesses,
                      out.tolerance, round(time.perf_counter() - t0, 3))
    except InputError as e:
        return Report(item_id, str(kind), expectation, "error", False, "input", {"error": str(e)},
                      "exact", round(time.perf_counter() - t0, 3))


@dataclass
class CorpusSummary:
    reports: list

    @property
    def exit_code(self) -> int:
        kinds = {r.mismatch for r in self.reports}
        if "input" in kinds:
            return 3
        if "hard" in kinds:
            return 1
        if "inconclusive" in kinds:
            return 2
        return 0

    @property
    def matched(self) -> int:
        return sum(r.match for r in self.reports)

    def summary_line(self) -> str:
        n = len(self.reports)
        return f"{n} item{'s' if n != 1 else ''}, {self.matched} matched, {n - self.matched} mismatched"

    def to_json(self, timing: bool = True) -> dict:
        return {"summary": self.summary_line(), "exit_code": self.exit_code,
                "reports": [r.to_json(timing) for r in self.reports]}


def corpus_files(directory, pattern: str | None = None) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise InputError(f"corpus directory {d} does not exist")
    files = sorted(p for p in d.glob("*.json") if p.is_file())
    if pattern:
        files = [p for p in files if fnmatch.fnmatch(p.name, pattern) or fnmatch.fnmatch(p.stem, pattern)]
    return files


def run_corpus(directory, pattern: str | None = None, jobs: int = 1) -> CorpusSummary:
    files = corpus_files(directory, pattern)
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_item, files))
    else:
        reports = [run_item(p) for p in files]
    reports.sort(key=lambda r: r.id)
    return CorpusSummary(reports)


def format_report_text(summary: CorpusSummary) -> str:
    lines = []
    for r in summary.reports:
        status = "ok  " if r.match else "MISMATCH"
        extra = ""
        if not r.match:
            extra = f" ({r.mismatch}; expected {r.expectation})"
        lines.append(f"{status} {r.id}: {r.verdict}{extra} [{r.seconds:.2f}s]")
        if r.verdict == "error":
            lines.append(f"     {r.witnesses.get('error')}")
    lines.append(summary.summary_line())
    return "\n".join(lines)


def dump_reports(summary: CorpusSummary, timing: bool = False) -> str:
    return json.dumps(summary.to_json(timing), indent=2, sort_keys=True, default=str)
