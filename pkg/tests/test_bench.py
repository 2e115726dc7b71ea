import json

import pytest

from metaguard.bench import (
    FEATURES, MATRIX, TIMEOUT_CELL, CaseError, load_case, load_suite, run_case, run_suite, score,
    write_metrics,
)
from metaguard.core_lang import SourceSpan
from metaguard.explorer import ViolationReport


def _case(suite, name):
    (c,) = [c for c in load_suite(suite) if c.name == name]
    return c


def _report(file, line):
    return ViolationReport(SourceSpan(file, line, 1, line, 5), "apply", 0)


@pytest.mark.parametrize("suite, n", [("analogues", 8), ("ac", 12), ("ifc", 14)])
def test_suite_sizes(suite, n):
    cases = load_suite(suite)
    assert len(cases) == n and len({c.key for c in cases}) == n


def test_ifc_feature_coverage():
    feats = set()
    for c in load_suite("ifc"):
        feats |= set(c.features)
    assert feats <= FEATURES and len(feats) >= 5


def test_score_examples():
    c = _case("analogues", "sequential")
    f = c.program.file
    truth = sorted(ln for _, ln in c.truth)
    m = score([], c)
    assert (m.tp, m.fp, m.fn) == (0, 0, 3)
    m = score([_report(f, ln) for ln in truth], c)
    assert (m.tp, m.fp, m.fn) == (3, 0, 0)
    m = score([_report(f, 1), _report(f, 2), _report(f, 3), _report(f, 5)], _case("analogues", "safe"))
    assert (m.tp, m.fp, m.fn) == (0, 4, 0)


def test_score_accepts_json_and_dedups_columns():
    c = _case("analogues", "recursive")
    (line,) = [ln for _, ln in c.truth]
    reps = [_report(c.program.file, line).to_json(),
            ViolationReport(SourceSpan(c.program.file, line, 9, line, 12), "apply", 1)]
    m = score(reps, c)
    assert (m.tp, m.fp, m.fn) == (1, 0, 0)


def test_case_validation(tmp_path):
    d = tmp_path / "broken"
    d.mkdir()
    (d / "program.js0").write_text("fetch(1); // @violation\nfetch(2);\n")
    (d / "policy.pol").write_text("a: onCall(fetch).deny();\n")
    (d / "truth.json").write_text(json.dumps({"violations": [2], "features": []}))
    with pytest.raises(CaseError, match="disagree"):
        load_case(d, "t")
    (d / "truth.json").write_text(json.dumps({"violations": [1], "features": ["nope"]}))
    with pytest.raises(CaseError, match="unknown feature"):
        load_case(d, "t")
    (d / "truth.json").write_text(json.dumps({"violations": [1], "features": []}))
    c = load_case(d, "t")
    assert c.truth == {(c.program.file, 1)} and c.key == "t/broken"


def test_run_case_ok_and_ceiling():
    c = _case("analogues", "sequential")
    m = run_case(c, "2PH", "H")
    assert (m.status, m.tp, m.fp, m.fn) == ("ok", 3, 0, 0) and m.states > 0
    m = run_case(c, "1PH", "H", node_ceiling=500)
    assert m.status == "ceiling" and m.states == 500 and m.tp is None


def test_run_suite_rows_and_timeout():
    cases = [_case("analogues", "sequential"), _case("analogues", "recursive")]
    rows = run_suite(cases, timeout=120, workers=1, node_ceiling=2000)
    assert len(rows) == len(cases) * len(MATRIX)
    assert [(r.case, r.approach, r.precision) for r in rows] == [
        (c.key, a, p) for c in cases for a, p in MATRIX]
    rows = run_suite(cases[:1], [("1PH", "H")], timeout=0.5, workers=1)
    (r,) = rows
    assert r.status == "timeout" and r.cells()[4:] == [TIMEOUT_CELL] * 5


def test_write_metrics(tmp_path):
    c = _case("analogues", "recursive")
    rows = [run_case(c, "2PH", "H"), run_case(c, "1PH", "L", node_ceiling=300)]
    paths = write_metrics(rows, tmp_path / "a")
    again = write_metrics(rows, tmp_path / "b")
    for k in ("json", "csv", "states", "times"):
        assert paths[k].exists()
    assert paths["csv"].read_text().splitlines()[0] == "case,approach,precision,status,tp,fp,fn,states,wall_time"
    assert json.loads(paths["json"].read_text())[0]["case"] == "analogues/recursive"
    assert paths["states"].read_bytes() == again["states"].read_bytes()
